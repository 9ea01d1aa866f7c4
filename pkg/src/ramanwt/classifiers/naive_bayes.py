from __future__ import annotations

import numpy as np

from ..errors import DataError
from ..serialization import register
from .base import Classifier, check_xy, softmax


@register("nb")
class GaussianNB(Classifier):
    """Gaussian naive Bayes with per-class, per-feature mean and variance.

    Variances are floored by ``var_smoothing`` times the largest feature
    variance of the training set.
    """

    def __init__(self, var_smoothing: float = 1e-9):
        self.var_smoothing = var_smoothing

    def fit(self, X, y, n_classes=None):
        X, y, C = check_xy(X, y, n_classes)
        counts = np.bincount(y, minlength=C)
        if np.any(counts < 2):
            raise DataError(f"naive Bayes needs at least 2 samples per class, got {counts.tolist()}")
        self.n_classes = C
        self.epsilon_ = self.var_smoothing * float(np.var(X, axis=0).max())
        if self.epsilon_ == 0:
            self.epsilon_ = self.var_smoothing
        self.log_prior_ = np.log(counts / counts.sum())
        self.theta_ = np.stack([X[y == c].mean(axis=0) for c in range(C)])
        self.var_ = np.stack([X[y == c].var(axis=0) for c in range(C)]) + self.epsilon_
        return self

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty((X.shape[0], self.n_classes))
        for c in range(self.n_classes):
            norm = -0.5 * np.sum(np.log(2.0 * np.pi * self.var_[c]))
            out[:, c] = self.log_prior_[c] + norm - 0.5 * np.sum((X - self.theta_[c]) ** 2 / self.var_[c], axis=1)
        return out

    def predict_proba(self, X):
        return softmax(self.joint_log_likelihood(X), axis=1)

    def predict(self, X):
        return np.argmax(self.joint_log_likelihood(X), axis=1)

    def get_state(self):
        params = {"var_smoothing": self.var_smoothing, "n_classes": self.n_classes, "epsilon": self.epsilon_}
        return params, {"log_prior": self.log_prior_, "theta": self.theta_, "var": self.var_}

    @classmethod
    def from_state(cls, params, arrays):
        m = cls(params["var_smoothing"])
        m.n_classes = params["n_classes"]
        m.epsilon_ = params["epsilon"]
        m.log_prior_, m.theta_, m.var_ = arrays["log_prior"], arrays["theta"], arrays["var"]
        return m
