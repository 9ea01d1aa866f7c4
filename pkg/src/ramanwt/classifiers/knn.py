from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import DataError
from ..serialization import register
from .base import Classifier, check_xy


@register("knn")
class KNeighbors(Classifier):
    """k-nearest neighbours under Euclidean distance.

    Neighbours at equal distance are taken in training order. A tied vote
    goes to the class whose voters have the smaller summed distance, then
    to the lowest class index.
    """

    def __init__(self, k: int = 5, chunk: int = 256):
        self.k = k
        self.chunk = chunk

    def fit(self, X, y, n_classes=None):
        X, y, C = check_xy(X, y, n_classes)
        if not 1 <= self.k <= X.shape[0]:
            raise DataError(f"k={self.k} must lie in [1, {X.shape[0]}]")
        self.X_, self.y_, self.n_classes = X, y, C
        return self

    def _votes(self, X):
        X = np.asarray(X, dtype=np.float64)
        counts = np.zeros((X.shape[0], self.n_classes))
        dsum = np.zeros((X.shape[0], self.n_classes))
        for start in range(0, X.shape[0], self.chunk):
            d = cdist(X[start:start + self.chunk], self.X_)
            nn = np.argsort(d, axis=1, kind="stable")[:, : self.k]
            rows = np.arange(nn.shape[0])[:, None]
            lab = self.y_[nn]
            sl = slice(start, start + nn.shape[0])
            np.add.at(counts[sl], (rows, lab), 1.0)
            np.add.at(dsum[sl], (rows, lab), d[rows, nn])
        return counts, dsum

    def predict(self, X):
        counts, dsum = self._votes(X)
        top = counts == counts.max(axis=1, keepdims=True)
        # among tied classes pick the smallest summed distance; argmin keeps the lowest index
        return np.argmin(np.where(top, dsum, np.inf), axis=1)

    def predict_proba(self, X):
        counts, _ = self._votes(X)
        return counts / self.k

    def get_state(self):
        return {"k": self.k, "n_classes": self.n_classes}, {"X": self.X_, "y": self.y_}

    @classmethod
    def from_state(cls, params, arrays):
        m = cls(params["k"])
        m.X_, m.y_, m.n_classes = arrays["X"], arrays["y"], params["n_classes"]
        return m
