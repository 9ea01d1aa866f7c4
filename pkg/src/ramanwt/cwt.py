"""Morlet continuous wavelet transform and scalogram rendering.

Coefficients follow the sampled form of

    X(a, b) = 1/sqrt(a) * sum_t conj(psi((t - b) / a)) * x(t)

with unit sample spacing, ``psi`` the analytic Morlet wavelet and zero
padding outside the signal. The wavelet is truncated at ``|t - b| > 8a``.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .errors import DegenerateRangeWarning, ScaleTooLarge
from .spectrum import Spectrum

TRUNCATION = 8.0
DEFAULT_SCALES = 64
DEFAULT_SIDE = 64


def morlet(t, fc: float = 1.0):
    """Complex Morlet ``pi**-0.25 * exp(2j*pi*fc*t) * exp(-t**2/2)``.

    ``fc`` is the centre frequency in cycles per unit of ``t``.
    """
    if fc <= 0:
        raise ValueError("centre frequency must be positive")
    t = np.asarray(t, dtype=float)
    return np.pi**-0.25 * np.exp(2j * np.pi * fc * t) * np.exp(-0.5 * t * t)


def scales_grid(n: int, a_min: float, a_max: float) -> np.ndarray:
    """``n`` log-spaced scales from ``a_min`` to ``a_max`` inclusive."""
    if n < 2 or not (0 < a_min < a_max):
        raise ValueError("need n >= 2 and 0 < a_min < a_max")
    s = np.geomspace(a_min, a_max, n)
    s[0], s[-1] = a_min, a_max
    return s


def default_scales(n_samples: int, n_scales: int = DEFAULT_SCALES) -> np.ndarray:
    return scales_grid(n_scales, 1.0, n_samples / 4.0)


@dataclass(frozen=True, eq=False)
class Scalogram:
    scales: np.ndarray
    coefficients: np.ndarray
    source_id: str = ""

    def __post_init__(self):
        if self.coefficients.shape[0] != self.scales.size:
            raise ValueError("one coefficient row per scale required")

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.coefficients)


def _check_scales(scales, n):
    scales = np.asarray(scales, dtype=float)
    if scales.ndim != 1 or scales.size == 0:
        raise ValueError("scales must be a non-empty 1-D array")
    if np.any(np.diff(scales) <= 0):
        raise ValueError("scales must be strictly ascending")
    if scales[0] < 1:
        raise ValueError("scales below one sample are not supported")
    if scales[-1] > n / 2:
        raise ScaleTooLarge(f"scale {scales[-1]:g} exceeds half the signal length {n}")
    return scales


def _kernel(a, fc):
    half = int(np.floor(TRUNCATION * a))
    k = np.arange(-half, half + 1)
    return morlet(k / a, fc), half


def _cwt_direct(x, scales, fc):
    n = x.size
    out = np.empty((scales.size, n), dtype=complex)
    for i, a in enumerate(scales):
        h, half = _kernel(a, fc)
        out[i] = np.convolve(x, h, mode="full")[half:half + n] / np.sqrt(a)
    return out


@functools.lru_cache(maxsize=8)
def _kernel_bank(scales_key, n, fc):
    scales = np.asarray(scales_key)
    half_max = int(np.floor(TRUNCATION * scales[-1]))
    size = sfft.next_fast_len(n + 2 * half_max)
    bank = np.zeros((scales.size, size), dtype=complex)
    for i, a in enumerate(scales):
        h, half = _kernel(a, fc)
        bank[i, half_max - half:half_max + half + 1] = h / np.sqrt(a)
    return sfft.fft(bank, axis=1), half_max, size


def _cwt_fft(x, scales, fc):
    bank, half_max, size = _kernel_bank(tuple(scales.tolist()), x.size, fc)
    spec = sfft.fft(x, size)
    full = sfft.ifft(bank * spec, axis=1)
    return full[:, half_max:half_max + x.size]


def cwt(signal, scales=None, fc: float = 1.0, method: str = "fft", source_id: str = "") -> Scalogram:
    """Morlet CWT of a uniformly sampled real signal.

    Parameters
    ----------
    signal : array_like or Spectrum
        Samples on a uniform grid; the step is taken as one unit.
    scales : array_like, optional
        Strictly ascending scales in samples, each in ``[1, len/2]``.
        Defaults to 64 log-spaced scales over ``[1, len/4]``.
    method : {"fft", "direct"}
        ``direct`` evaluates the truncated sum literally and is the
        reference; ``fft`` evaluates the same truncated sum through one
        zero-padded FFT per call and agrees to ~1e-12.
    """
    if isinstance(signal, Spectrum):
        source_id = source_id or signal.source_id
        signal = signal.intensities
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise ValueError("signal must be 1-D")
    if scales is None:
        scales = default_scales(x.size)
    scales = _check_scales(scales, x.size)
    if method == "direct":
        coef = _cwt_direct(x, scales, fc)
    elif method == "fft":
        coef = _cwt_fft(x, scales, fc)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Scalogram(scales, coef, source_id)


def ridge(sc: Scalogram) -> np.ndarray:
    """Scale of maximum magnitude at every shift."""
    return sc.scales[np.argmax(sc.magnitude, axis=0)]


def dominant_scale(sc: Scalogram, margin: float = TRUNCATION) -> float:
    """Scale maximizing mean magnitude over shifts clear of the edges of the
    largest scale's support (``margin * a_max`` samples)."""
    n = sc.coefficients.shape[1]
    edge = min(int(margin * sc.scales[-1]), (n - 1) // 2)
    mag = sc.magnitude[:, edge:n - edge]
    return float(sc.scales[np.argmax(mag.mean(axis=1))])


# -- rendering -------------------------------------------------------------


def _jet_table():
    v = np.arange(256) / 255.0
    rgb = np.stack([np.clip(1.5 - np.abs(4 * v - c), 0, 1) for c in (3, 2, 1)], axis=1)
    return np.round(rgb * 255).astype(np.uint8)


# MATLAB-style jet: piecewise linear blue -> cyan -> yellow -> red.
JET = _jet_table()
JET.setflags(write=False)


@dataclass(frozen=True, eq=False)
class ScalogramImage:
    pixels: np.ndarray  # (H, W, 3) uint8
    source_id: str = ""

    def __post_init__(self):
        p = np.asarray(self.pixels)
        if p.ndim != 3 or p.shape[2] != 3 or p.dtype != np.uint8:
            raise ValueError("pixels must be an (H, W, 3) uint8 array")

    @property
    def side(self) -> int:
        return self.pixels.shape[0]

    def as_float(self) -> np.ndarray:
        return self.pixels.astype(np.float64) / 255.0


def intensity(sc: Scalogram, vrange=None) -> np.ndarray:
    """Pre-colormap intensities: ``log1p|X|`` min-max scaled to [0, 1].

    ``vrange`` fixes the ``(lo, hi)`` of the log magnitude instead of using
    the per-image extremes. Returns ``None`` when the range is degenerate.
    """
    m = np.log1p(sc.magnitude)
    lo, hi = (m.min(), m.max()) if vrange is None else vrange
    if hi <= lo:
        return None
    return np.clip((m - lo) / (hi - lo), 0.0, 1.0)


def _resize_weights(n_in, n_out):
    """Bilinear (triangle filter) resampling matrix with half-pixel centres.

    When shrinking, the triangle is widened by the reduction factor so every
    input sample contributes, as in PIL's BILINEAR filter.
    """
    scale = n_in / n_out
    support = max(scale, 1.0)
    centre = (np.arange(n_out) + 0.5) * scale - 0.5
    src = np.arange(n_in)
    w = np.clip(1.0 - np.abs(src[None, :] - centre[:, None]) / support, 0.0, None)
    if scale < 1.0:
        # upsampling: clamp at the borders instead of renormalizing partial taps
        pos = np.clip(centre, 0, n_in - 1)
        w = np.clip(1.0 - np.abs(src[None, :] - pos[:, None]), 0.0, None)
    return w / w.sum(axis=1, keepdims=True)


def resize_bilinear(img: np.ndarray, height: int, width: int) -> np.ndarray:
    wr = _resize_weights(img.shape[0], height)
    wc = _resize_weights(img.shape[1], width)
    return np.stack([wr @ img[..., c] @ wc.T for c in range(img.shape[2])], axis=-1)


def render(sc: Scalogram, side: int = DEFAULT_SIDE, colormap=JET, vrange=None) -> ScalogramImage:
    """Rasterize ``|X|`` into a ``side x side`` RGB image.

    log1p, min-max to [0, 1], 256-entry colormap lookup, then bilinear
    resize. Rows run from the smallest scale (top) to the largest.
    """
    if side < 16:
        raise ValueError("side must be at least 16")
    colormap = np.asarray(colormap)
    v = intensity(sc, vrange)
    if v is None:
        warnings.warn("scalogram has constant magnitude; emitting flat image", DegenerateRangeWarning, stacklevel=2)
        rgb = np.broadcast_to(colormap[len(colormap) // 2].astype(float), (side, side, 3))
        return ScalogramImage(np.ascontiguousarray(rgb).astype(np.uint8), sc.source_id)
    idx = np.rint(v * (len(colormap) - 1)).astype(int)
    rgb = colormap[idx].astype(float)
    out = resize_bilinear(rgb, side, side)
    return ScalogramImage(np.clip(np.rint(out), 0, 255).astype(np.uint8), sc.source_id)


def scalogram_image(s, side: int = DEFAULT_SIDE, scales=None, fc: float = 1.0) -> ScalogramImage:
    """Spectrum (or 1-D array) straight to a rendered image."""
    return render(cwt(s, scales, fc), side)


def save_png(img: ScalogramImage, path) -> None:
    from PIL import Image

    Image.fromarray(img.pixels, mode="RGB").save(path, format="PNG")


def load_png(path) -> ScalogramImage:
    from PIL import Image

    with Image.open(path) as im:
        return ScalogramImage(np.asarray(im.convert("RGB"), dtype=np.uint8).copy())


def save_raw(sc: Scalogram, path) -> None:
    """Exact dump as ``.npz`` with arrays ``scales`` (S,) and ``coefficients`` (S, N) complex128."""
    np.savez(path, scales=sc.scales, coefficients=sc.coefficients, source_id=np.array(sc.source_id))


def load_raw(path) -> Scalogram:
    with np.load(path) as z:
        return Scalogram(z["scales"], z["coefficients"], str(z["source_id"]))
