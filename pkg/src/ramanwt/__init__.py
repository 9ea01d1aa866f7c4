"""Raman spectrum classification through wavelet scalograms.

Spectra are read or synthesized, corrupted with baseline drift and white
Gaussian noise at a target SNR, transformed with a Morlet CWT, rendered as
RGB scalogram images and classified either by classical models on
down-sampled image features or by a small 2-D CNN.
"""

from .cwt import Scalogram, ScalogramImage, cwt, default_scales, render, scalogram_image
from .errors import DataError, Diverged, RamanWTError
from .evaluation import EvalReport, SweepCurve, confusion, emit_report, evaluate, metrics, snr_sweep, threshold_snr
from .noise import BbnConfig, Dataset, DatasetConfig, NoiseConfig, awgn, build_dataset, inject
from .serialization import load_model, save_model
from .spectrum import DatasetManifest, ManifestEntry, Peak, Spectrum, parse_rruff, read_rruff, resample, synth_lorentzian

__version__ = "0.1.0"

__all__ = [
    "BbnConfig",
    "DataError",
    "Dataset",
    "DatasetConfig",
    "DatasetManifest",
    "Diverged",
    "EvalReport",
    "ManifestEntry",
    "NoiseConfig",
    "Peak",
    "RamanWTError",
    "Scalogram",
    "ScalogramImage",
    "Spectrum",
    "SweepCurve",
    "awgn",
    "build_dataset",
    "confusion",
    "cwt",
    "default_scales",
    "emit_report",
    "evaluate",
    "inject",
    "load_model",
    "metrics",
    "parse_rruff",
    "read_rruff",
    "render",
    "resample",
    "save_model",
    "scalogram_image",
    "snr_sweep",
    "synth_lorentzian",
    "threshold_snr",
]
