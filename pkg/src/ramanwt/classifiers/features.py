"""Feature vectors for the classical classifiers: a 32 x 32 grayscale
area-average of the scalogram image, flattened to [0, 1]."""

from __future__ import annotations

import numpy as np

FEATURE_SIDE = 32


def area_weights(n_in: int, n_out: int) -> np.ndarray:
    """Row-stochastic matrix averaging ``n_in`` cells into ``n_out`` by overlap length."""
    edges = np.arange(n_out + 1) * (n_in / n_out)
    lo = np.maximum(edges[:-1, None], np.arange(n_in)[None, :])
    hi = np.minimum(edges[1:, None], np.arange(n_in)[None, :] + 1)
    w = np.clip(hi - lo, 0.0, None)
    return w / w.sum(axis=1, keepdims=True)


def area_downsample(img: np.ndarray, height: int, width: int) -> np.ndarray:
    return area_weights(img.shape[0], height) @ img @ area_weights(img.shape[1], width).T


def features(img, side: int = FEATURE_SIDE) -> np.ndarray:
    """Luminance (mean of RGB) downsampled to ``side x side`` and flattened."""
    pixels = getattr(img, "pixels", img)
    lum = np.asarray(pixels, dtype=np.float64).mean(axis=2) / 255.0
    return area_downsample(lum, side, side).ravel()


def feature_matrix(images, side: int = FEATURE_SIDE) -> np.ndarray:
    return np.stack([features(im, side) for im in images])
