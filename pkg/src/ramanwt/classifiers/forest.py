"""Bagged CART trees with Gini impurity splits."""

from __future__ import annotations

import numpy as np

from ..serialization import register
from .base import Classifier, check_xy


def gini(counts) -> np.ndarray:
    """Gini impurity of class-count vectors along the last axis."""
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = counts / n[..., None]
        g = 1.0 - np.sum(p * p, axis=-1)
    return np.where(n > 0, g, 0.0)


def best_split(X, Y, features):
    """Best Gini split of one node over candidate ``features``.

    Parameters
    ----------
    X : (n, d) array
    Y : (n, C) one-hot labels
    features : sequence of column indices to try

    Returns
    -------
    (feature, threshold, gain), or ``None`` when every candidate column is
    constant. Samples with ``x <= threshold`` go left. Thresholds are
    midpoints between consecutive distinct values.
    """
    features = np.asarray(features)
    n = X.shape[0]
    vals = X[:, features]
    order = np.argsort(vals, axis=0, kind="stable")
    sv = np.take_along_axis(vals, order, axis=0)
    left = np.cumsum(Y[order], axis=0)[:-1]  # (n-1, m, C)
    total = Y.sum(axis=0)
    right = total - left
    n_left = np.arange(1, n)[:, None]
    parent = gini(total)
    gain = parent - (n_left * gini(left) + (n - n_left) * gini(right)) / n
    valid = sv[1:] > sv[:-1]
    if not valid.any():
        return None
    gain = np.where(valid, gain, -np.inf)
    pos, col = np.unravel_index(np.argmax(gain), gain.shape)
    threshold = 0.5 * (sv[pos, col] + sv[pos + 1, col])
    if not threshold < sv[pos + 1, col]:
        # midpoint rounded up onto the larger value
        threshold = sv[pos, col]
    return int(features[col]), float(threshold), float(gain[pos, col])


class DecisionTree:
    """CART classification tree stored as flat node arrays."""

    def __init__(self, max_depth=16, max_features=None, min_samples_split=2, rng=None):
        self.max_depth = max_depth
        self.max_features = max_features
        self.min_samples_split = min_samples_split
        self.rng = np.random.default_rng(rng)

    def fit(self, X, y, n_classes):
        Y = np.eye(n_classes)[y]
        d = X.shape[1]
        m = d if self.max_features is None else max(1, min(d, self.max_features))
        feature, threshold, left, right, value = [], [], [], [], []

        def new_node(idx):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(Y[idx].sum(axis=0))
            return len(feature) - 1

        stack = [(new_node(np.arange(X.shape[0])), np.arange(X.shape[0]), 0)]
        while stack:
            node, idx, depth = stack.pop()
            counts = value[node]
            if depth >= self.max_depth or idx.size < self.min_samples_split or np.count_nonzero(counts) <= 1:
                continue
            perm = self.rng.permutation(d)
            split = None
            # draw further feature blocks only if every sampled column is constant here
            for start in range(0, d, m):
                split = best_split(X[idx], Y[idx], perm[start:start + m])
                if split is not None:
                    break
            if split is None or split[2] <= 0:
                continue
            f, t, _ = split
            go_left = X[idx, f] <= t
            li, ri = idx[go_left], idx[~go_left]
            feature[node], threshold[node] = f, t
            left[node] = new_node(li)
            right[node] = new_node(ri)
            stack.append((right[node], ri, depth + 1))
            stack.append((left[node], li, depth + 1))

        self.feature_ = np.array(feature, dtype=np.int64)
        self.threshold_ = np.array(threshold, dtype=np.float64)
        self.left_ = np.array(left, dtype=np.int64)
        self.right_ = np.array(right, dtype=np.int64)
        self.value_ = np.array(value, dtype=np.float64)
        return self

    def apply(self, X) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.left_[node] >= 0
        while active.any():
            n = node[active]
            go_left = X[active, self.feature_[n]] <= self.threshold_[n]
            node[active] = np.where(go_left, self.left_[n], self.right_[n])
            active = self.left_[node] >= 0
        return node

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.value_[self.apply(X)], axis=1)

    @property
    def n_nodes(self):
        return self.feature_.size


@register("rf")
class RandomForest(Classifier):
    """Bootstrap-aggregated CART trees, sqrt(d) candidate features per node,
    majority vote (ties to the lowest class index). Tree ``i`` draws from
    an independent stream spawned from ``seed``."""

    def __init__(self, n_trees=100, max_depth=16, max_features="sqrt", bootstrap=True, seed=0):
        if n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = seed

    def _n_features(self, d):
        if self.max_features == "sqrt":
            return max(1, int(np.sqrt(d)))
        if self.max_features is None:
            return d
        return int(self.max_features)

    def fit(self, X, y, n_classes=None):
        X, y, C = check_xy(X, y, n_classes)
        self.n_classes = C
        self.n_features_ = X.shape[1]
        m = self._n_features(X.shape[1])
        self.trees_ = []
        for child in np.random.SeedSequence(self.seed).spawn(self.n_trees):
            rng = np.random.default_rng(child)
            idx = rng.integers(0, X.shape[0], X.shape[0]) if self.bootstrap else np.arange(X.shape[0])
            tree = DecisionTree(self.max_depth, m, rng=rng)
            self.trees_.append(tree.fit(X[idx], y[idx], C))
        return self

    def _votes(self, X):
        X = np.asarray(X, dtype=np.float64)
        votes = np.zeros((X.shape[0], self.n_classes))
        rows = np.arange(X.shape[0])
        for t in self.trees_:
            votes[rows, t.predict(X)] += 1
        return votes

    def predict_proba(self, X):
        return self._votes(X) / len(self.trees_)

    def predict(self, X):
        return np.argmax(self._votes(X), axis=1)

    def get_state(self):
        params = {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
            "n_classes": self.n_classes,
        }
        sizes = np.array([t.n_nodes for t in self.trees_], dtype=np.int64)
        cat = lambda name: np.concatenate([getattr(t, name) for t in self.trees_])  # noqa: E731
        arrays = {
            "tree_sizes": sizes,
            "feature": cat("feature_"),
            "threshold": cat("threshold_"),
            "left": cat("left_"),
            "right": cat("right_"),
            "value": cat("value_"),
        }
        return params, arrays

    @classmethod
    def from_state(cls, params, arrays):
        m = cls(params["n_trees"], params["max_depth"], params["max_features"], params["bootstrap"], params["seed"])
        m.n_classes = params["n_classes"]
        m.trees_ = []
        offsets = np.concatenate(([0], np.cumsum(arrays["tree_sizes"])))
        for a, b in zip(offsets[:-1], offsets[1:]):
            t = DecisionTree(params["max_depth"])
            t.feature_ = arrays["feature"][a:b]
            t.threshold_ = arrays["threshold"][a:b]
            t.left_ = arrays["left"][a:b]
            t.right_ = arrays["right"][a:b]
            t.value_ = arrays["value"][a:b]
            m.trees_.append(t)
        return m
