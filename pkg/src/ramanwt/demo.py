"""Bundled synthetic material profiles.

Five Lorentzian peak sets loosely imitating the band positions of
Actinolite, Albite, Forsterite, Grossular and Marialite. They are not
reference spectra; they only give the pipeline something realistic-looking
to work on when no RRUFF files are at hand. Each profile has an unbounded
number of deterministic "originals" that jitter peak position, width and
height, mimicking the spread between RRUFF records of one mineral.
"""

from __future__ import annotations

import numpy as np

from .spectrum import DatasetManifest, ManifestEntry, Spectrum, synth_lorentzian

# (center cm^-1, half width cm^-1, relative height)
PROFILES = {
    "Actinolite": [
        (180, 6, 0.45), (225, 6, 0.5), (370, 7, 0.4), (393, 6, 0.35), (530, 8, 0.3),
        (675, 5, 1.0), (750, 7, 0.2), (930, 8, 0.15), (1030, 7, 0.35), (1060, 7, 0.3),
    ],
    "Albite": [
        (290, 6, 0.35), (330, 6, 0.25), (480, 5, 0.7), (507, 4, 1.0), (580, 7, 0.15),
        (765, 6, 0.15), (815, 7, 0.15), (1100, 8, 0.12),
    ],
    "Forsterite": [
        (225, 6, 0.2), (305, 6, 0.25), (545, 6, 0.15), (608, 6, 0.1), (824, 5, 1.0),
        (856, 5, 0.9), (920, 8, 0.15), (965, 7, 0.25),
    ],
    "Grossular": [
        (245, 6, 0.3), (280, 6, 0.25), (375, 5, 1.0), (420, 6, 0.35), (550, 7, 0.3),
        (630, 7, 0.15), (825, 7, 0.3), (880, 5, 0.75), (1007, 6, 0.4),
    ],
    "Marialite": [
        (260, 8, 0.3), (300, 8, 0.25), (455, 8, 0.5), (540, 7, 1.0), (580, 8, 0.3),
        (775, 8, 0.2), (1095, 9, 0.25),
    ],
}
CLASS_NAMES = tuple(PROFILES)
DEMO_GRID = np.arange(150.0, 1251.0, 1.0)
_DEMO_SEED = 20210


def demo_spectrum(profile: str, variant: int = 0) -> Spectrum:
    """Return original ``variant`` of a bundled profile (variant 0 is unjittered)."""
    if profile not in PROFILES:
        raise KeyError(f"unknown demo profile {profile!r}; choose from {CLASS_NAMES}")
    base = np.asarray(PROFILES[profile], dtype=float)
    if variant == 0:
        peaks = base
    else:
        rng = np.random.default_rng([_DEMO_SEED, CLASS_NAMES.index(profile), variant])
        n = len(base)
        shift = rng.normal(0.0, 2.0) + rng.normal(0.0, 2.5, n)
        peaks = np.column_stack([
            base[:, 0] + shift,
            base[:, 1] * rng.uniform(0.75, 1.35, n),
            base[:, 2] * rng.uniform(0.6, 1.4, n),
        ])
    return synth_lorentzian(peaks, DEMO_GRID, label=profile, source_id=f"synth:{profile}/{variant}")


def demo_manifest(n_originals: int = 12, classes=CLASS_NAMES) -> DatasetManifest:
    """Manifest of clean demo originals, ``n_originals`` per class."""
    entries = [
        ManifestEntry(id=f"{name}-{v:02d}", source=f"synth:{name}/{v}", label=name)
        for name in classes
        for v in range(n_originals)
    ]
    return DatasetManifest(entries, classes)
