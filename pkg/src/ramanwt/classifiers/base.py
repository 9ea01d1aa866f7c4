from __future__ import annotations

import numpy as np

from ..errors import DataError, EmptyTrainingSet


class Classifier:
    """Common fit/predict surface. Labels are integer class indices."""

    kind = "?"
    n_classes: int

    def fit(self, X, y, n_classes=None):
        raise NotImplementedError

    def predict_proba(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def get_state(self):
        raise NotImplementedError

    @classmethod
    def from_state(cls, params, arrays):
        raise NotImplementedError


def check_xy(X, y, n_classes=None):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2:
        raise DataError("X must be 2-D (samples x features)")
    if X.shape[0] == 0:
        raise EmptyTrainingSet("no training samples")
    if y.shape != (X.shape[0],):
        raise DataError("y must have one label per row of X")
    if not np.all(np.isfinite(X)):
        raise DataError("features must be finite")
    y = y.astype(np.int64)
    if n_classes is None:
        n_classes = int(y.max()) + 1
    if y.min() < 0 or y.max() >= n_classes:
        raise DataError(f"labels must lie in [0, {n_classes})")
    return X, y, int(n_classes)


def softmax(z, axis=-1):
    z = z - np.max(z, axis=axis, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=axis, keepdims=True)
