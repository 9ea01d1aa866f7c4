"""Raman spectra: RRUFF text ingestion, synthetic Lorentzian spectra,
uniform-grid resampling and dataset manifests."""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateWavenumberWarning,
    InvalidPeak,
    MalformedLine,
    NonFinite,
    SchemaError,
    TooShort,
)

MIN_POINTS = 16
DEFAULT_GRID_LENGTH = 1024
SCENARIOS = ("GN", "BB", "GB", "CLEAN")
SPLITS = ("train", "test")

_SPLIT_RE = re.compile(r"[,\s]+")


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Spectrum:
    """A 1-D Raman signal on an ascending wavenumber axis.

    Parameters
    ----------
    wavenumbers : array_like
        Strictly ascending Raman shifts in cm^-1.
    intensities : array_like
        Intensity per wavenumber, same length.
    label : str, optional
        Class (material) name.
    source_id : str
        Free-form identifier of where the spectrum came from.
    metadata : dict
        Extra ``KEY=VALUE`` header fields.
    """

    wavenumbers: np.ndarray
    intensities: np.ndarray
    label: str | None = None
    source_id: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        x = _frozen(self.wavenumbers)
        y = _frozen(self.intensities)
        if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
            raise ValueError("wavenumbers and intensities must be 1-D and of equal length")
        if x.size < MIN_POINTS:
            raise TooShort(f"spectrum has {x.size} points, need at least {MIN_POINTS}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise NonFinite("spectrum contains NaN or Inf")
        if np.any(np.diff(x) <= 0):
            raise ValueError("wavenumbers must be strictly ascending")
        object.__setattr__(self, "wavenumbers", x)
        object.__setattr__(self, "intensities", y)
        object.__setattr__(self, "metadata", dict(self.metadata))

    def __len__(self):
        return self.wavenumbers.size

    def __eq__(self, other):
        if not isinstance(other, Spectrum):
            return NotImplemented
        return (
            self.label == other.label
            and self.source_id == other.source_id
            and self.metadata == other.metadata
            and np.array_equal(self.wavenumbers, other.wavenumbers)
            and np.array_equal(self.intensities, other.intensities)
        )

    __hash__ = None

    def replace(self, **changes) -> "Spectrum":
        kw = dict(
            wavenumbers=self.wavenumbers,
            intensities=self.intensities,
            label=self.label,
            source_id=self.source_id,
            metadata=self.metadata,
        )
        kw.update(changes)
        return Spectrum(**kw)

    @property
    def is_uniform(self) -> bool:
        step = np.diff(self.wavenumbers)
        return bool(np.allclose(step, step[0], rtol=1e-9, atol=0.0))

    def normalize(self) -> "Spectrum":
        """Min-max scale intensities to [0, 1]. Constant signals are returned unchanged."""
        y = self.intensities
        lo, hi = y.min(), y.max()
        if hi == lo:
            return self
        return self.replace(intensities=(y - lo) / (hi - lo))


def parse_rruff(text: str, source_id: str = "") -> Spectrum:
    """Parse RRUFF-style text into a :class:`Spectrum`.

    ``##KEY=VALUE`` lines are metadata; other non-empty lines are ``x, y``
    pairs separated by commas or whitespace. Data are sorted by wavenumber;
    repeated wavenumbers keep their first occurrence in file order and emit a
    :class:`~ramanwt.errors.DuplicateWavenumberWarning`.
    """
    meta = {}
    xs, ys = [], []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if "=" in body:
                key, value = body.split("=", 1)
                meta[key.strip()] = value.strip()
            continue
        parts = [p for p in _SPLIT_RE.split(line) if p]
        if len(parts) < 2:
            raise MalformedLine(line_no, raw)
        try:
            x, y = float(parts[0]), float(parts[1])
        except ValueError:
            raise MalformedLine(line_no, raw) from None
        if not (np.isfinite(x) and np.isfinite(y)):
            raise NonFinite(f"non-finite value on line {line_no}")
        xs.append(x)
        ys.append(y)

    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    if x.size:
        keep = np.concatenate(([True], np.diff(x) != 0))
        if not keep.all():
            warnings.warn(
                f"{np.count_nonzero(~keep)} duplicate wavenumber rows dropped (kept first)",
                DuplicateWavenumberWarning,
                stacklevel=2,
            )
            x, y = x[keep], y[keep]
    if x.size < MIN_POINTS:
        raise TooShort(f"{x.size} data points, need at least {MIN_POINTS}")

    label = meta.pop("NAMES", None) or None
    carried = meta.pop("SOURCE", "")
    if not source_id:
        source_id = meta.get("RRUFFID", carried)
    meta.pop("END", None)
    return Spectrum(x, y, label=label, source_id=source_id, metadata=meta)


def format_rruff(s: Spectrum) -> str:
    """Serialize to RRUFF text. Floats use ``repr`` so parsing is lossless."""
    lines = []
    if s.label is not None:
        lines.append(f"##NAMES={s.label}")
    for key, value in s.metadata.items():
        lines.append(f"##{key}={value}")
    if s.source_id and s.source_id != s.metadata.get("RRUFFID"):
        lines.append(f"##SOURCE={s.source_id}")
    lines.extend(f"{x!r}, {y!r}" for x, y in zip(s.wavenumbers.tolist(), s.intensities.tolist()))
    lines.append("##END=")
    return "\n".join(lines) + "\n"


def read_rruff(path) -> Spectrum:
    path = Path(path)
    s = parse_rruff(path.read_text(encoding="utf-8"))
    return s if s.source_id else s.replace(source_id=path.stem)


def write_rruff(s: Spectrum, path) -> None:
    Path(path).write_text(format_rruff(s), encoding="utf-8")


@dataclass(frozen=True)
class Peak:
    center: float
    width: float
    height: float


def _as_peak(p) -> Peak:
    if isinstance(p, Peak):
        return p
    if isinstance(p, dict):
        return Peak(float(p["center"]), float(p["width"]), float(p["height"]))
    c, w, h = p
    return Peak(float(c), float(w), float(h))


def lorentzian_sum(peaks: Iterable, x) -> np.ndarray:
    """Unnormalized sum of Lorentzians ``h w^2 / ((x - c)^2 + w^2)``.

    ``w`` is the half width at half maximum.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for p in peaks:
        p = _as_peak(p)
        out += p.height * p.width**2 / ((x - p.center) ** 2 + p.width**2)
    return out


def synth_lorentzian(peaks: Sequence, grid, label: str | None = None, source_id: str = "synth") -> Spectrum:
    """Synthetic spectrum made of Lorentzian peaks, normalized to [0, 1]."""
    peaks = [_as_peak(p) for p in peaks]
    if not peaks:
        raise InvalidPeak("at least one peak is required")
    for p in peaks:
        if not (p.width > 0 and p.height > 0):
            raise InvalidPeak(f"peak width and height must be positive: {p}")
    grid = np.asarray(grid, dtype=float)
    y = lorentzian_sum(peaks, grid)
    if y.max() == y.min():
        raise InvalidPeak("peaks produce a constant signal on this grid")
    return Spectrum(grid, y, label=label, source_id=source_id).normalize()


def resample(s: Spectrum, n: int = DEFAULT_GRID_LENGTH) -> Spectrum:
    """Linearly interpolate onto ``n`` uniformly spaced wavenumbers over the same span."""
    if n < MIN_POINTS:
        raise TooShort(f"cannot resample to {n} points, need at least {MIN_POINTS}")
    x = np.linspace(s.wavenumbers[0], s.wavenumbers[-1], n)
    y = np.interp(x, s.wavenumbers, s.intensities)
    return s.replace(wavenumbers=x, intensities=y)


# -- manifests ---------------------------------------------------------------

MANIFEST_VERSION = 1
MANIFEST_FIELDS = ("id", "source", "label", "split", "scenario", "snr_db", "seed")


@dataclass(frozen=True)
class ManifestEntry:
    """One dataset item.

    ``source`` is either a path to an RRUFF text file (relative paths are
    resolved against the manifest's directory) or a generator reference
    ``synth:<Profile>/<variant>`` naming a bundled demo spectrum.
    """

    id: str
    source: str
    label: str
    split: str = "train"
    scenario: str = "CLEAN"
    snr_db: float | None = None
    seed: int | None = None


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple
    class_names: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        validate_manifest(self)

    def label_index(self, label: str) -> int:
        return self.class_names.index(label)

    def by_split(self, split: str) -> list:
        return [e for e in self.entries if e.split == split]

    def class_counts(self, split: str | None = None) -> dict:
        counts = {c: 0 for c in self.class_names}
        for e in self.entries:
            if split is None or e.split == split:
                counts[e.label] += 1
        return counts


def validate_manifest(m: DatasetManifest) -> None:
    if len(m.class_names) < 2:
        raise SchemaError("class_names", "need at least two classes")
    if len(set(m.class_names)) != len(m.class_names):
        raise SchemaError("class_names", "duplicate class names")
    seen = set()
    for i, e in enumerate(m.entries):
        if e.label not in m.class_names:
            raise SchemaError(i, f"unknown label {e.label!r}")
        if e.split not in SPLITS:
            raise SchemaError(i, f"split must be one of {SPLITS}, got {e.split!r}")
        if e.scenario not in SCENARIOS:
            raise SchemaError(i, f"scenario must be one of {SCENARIOS}, got {e.scenario!r}")
        if e.id in seen:
            raise SchemaError(i, f"duplicate id {e.id!r}")
        if e.snr_db is not None and not np.isfinite(e.snr_db):
            raise SchemaError(i, "snr_db must be finite")
        seen.add(e.id)


def manifest_to_dict(m: DatasetManifest) -> dict:
    return {
        "format": "ramanwt-manifest",
        "version": MANIFEST_VERSION,
        "class_names": list(m.class_names),
        "entries": [asdict(e) for e in m.entries],
    }


def manifest_from_dict(d: dict) -> DatasetManifest:
    if d.get("version") != MANIFEST_VERSION:
        raise SchemaError("version", f"unsupported manifest version {d.get('version')!r}")
    entries = []
    for i, raw in enumerate(d.get("entries", [])):
        missing = [k for k in ("id", "source", "label") if k not in raw]
        if missing:
            raise SchemaError(i, f"missing fields {missing}")
        unknown = set(raw) - set(MANIFEST_FIELDS)
        if unknown:
            raise SchemaError(i, f"unknown fields {sorted(unknown)}")
        try:
            entries.append(
                ManifestEntry(
                    id=str(raw["id"]),
                    source=str(raw["source"]),
                    label=str(raw["label"]),
                    split=raw.get("split", "train"),
                    scenario=raw.get("scenario", "CLEAN"),
                    snr_db=None if raw.get("snr_db") is None else float(raw["snr_db"]),
                    seed=None if raw.get("seed") is None else int(raw["seed"]),
                )
            )
        except (TypeError, ValueError) as exc:
            raise SchemaError(i, str(exc)) from None
    return DatasetManifest(entries, d.get("class_names", ()))


def save_manifest(m: DatasetManifest, path) -> None:
    """Write the manifest as JSON (see README for the schema)."""
    Path(path).write_text(json.dumps(manifest_to_dict(m), indent=1) + "\n", encoding="utf-8")


def load_manifest(path) -> DatasetManifest:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError("file", f"not valid JSON: {exc}") from None
    return manifest_from_dict(d)


def load_source(entry: ManifestEntry, base_dir=".") -> Spectrum:
    """Materialize the clean spectrum an entry points at."""
    if entry.source.startswith("synth:"):
        from .demo import demo_spectrum

        profile, _, variant = entry.source[len("synth:"):].partition("/")
        s = demo_spectrum(profile, int(variant or 0))
    else:
        path = Path(entry.source)
        if not path.is_absolute():
            path = Path(base_dir) / path
        s = read_rruff(path)
    return s.replace(label=entry.label, source_id=entry.id)
