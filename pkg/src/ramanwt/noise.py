"""Baseline background noise (sum of sinusoids) and additive white Gaussian
noise at a target SNR, plus augmented dataset construction.

SNR is ``10 log10(P_s / P_n)`` with powers taken as mean squared values.
In the combined scenario only the Gaussian component counts toward ``P_n``;
the baseline is structured interference.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import EmptyClass, ZeroSignal
from .spectrum import (
    DEFAULT_GRID_LENGTH,
    SCENARIOS,
    DatasetManifest,
    ManifestEntry,
    Spectrum,
    load_manifest,
    load_source,
    read_rruff,
    resample,
    save_manifest,
    write_rruff,
)

INDEX_FIELDS = ("id", "label", "split", "scenario", "target_snr_db", "measured_snr_db", "seed")


@dataclass(frozen=True)
class BbnConfig:
    """Random baseline parameters.

    Amplitudes are fractions of the signal peak; wavelengths are fractions
    of the wavenumber span.
    """

    n_sinusoids_range: tuple = (1, 5)
    amplitude_range: tuple = (0.1, 1.0)
    width_range: tuple = (0.2, 1.0)

    def __post_init__(self):
        lo, hi = self.n_sinusoids_range
        if not (1 <= lo <= hi <= 16):
            raise ValueError(f"n_sinusoids_range must lie within [1, 16]: {self.n_sinusoids_range}")
        lo, hi = self.amplitude_range
        if not (0 < lo <= hi <= 2):
            raise ValueError(f"amplitude_range must lie within (0, 2]: {self.amplitude_range}")
        lo, hi = self.width_range
        if not (0 < lo <= hi <= 1):
            raise ValueError(f"width_range must lie within (0, 1]: {self.width_range}")


@dataclass(frozen=True)
class NoiseConfig:
    scenario: str = "GN"
    snr_db: float | None = 30.0
    bbn: BbnConfig = field(default_factory=BbnConfig)
    seed: int = 0

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.scenario in ("GN", "GB") and self.snr_db is None:
            raise ValueError(f"scenario {self.scenario} needs snr_db")


@dataclass(frozen=True)
class NoisySample:
    clean: Spectrum
    noisy: Spectrum
    scenario: str
    target_snr_db: float | None
    measured_snr_db: float | None
    seed: int


def signal_power(s) -> float:
    """Mean squared intensity of a Spectrum or array."""
    y = s.intensities if isinstance(s, Spectrum) else np.asarray(s, dtype=float)
    return float(np.mean(y * y))


def snr_db(signal_pw: float, noise_pw: float) -> float:
    return float(10.0 * np.log10(signal_pw / noise_pw))


def gaussian_noise(n, power, rng, calibrate=True) -> np.ndarray:
    """Zero-mean Gaussian noise of the given power.

    With ``calibrate`` the draw is rescaled so its empirical mean square is
    exactly ``power``; otherwise samples are raw i.i.d. N(0, power).
    """
    noise = rng.standard_normal(n) * np.sqrt(power)
    if calibrate:
        noise *= np.sqrt(power / np.mean(noise * noise))
    return noise


def awgn(s: Spectrum, snr: float, rng, calibrate: bool = True, seed: int = -1) -> NoisySample:
    """Add white Gaussian noise so that ``P_s / P_n = 10**(snr/10)``."""
    ps = signal_power(s)
    if ps == 0:
        raise ZeroSignal("signal power is zero; SNR undefined")
    pn = ps * 10.0 ** (-snr / 10.0)
    noise = gaussian_noise(len(s), pn, rng, calibrate=calibrate)
    noisy = s.replace(intensities=s.intensities + noise)
    return NoisySample(s, noisy, "GN", float(snr), snr_db(ps, signal_power(noise)), seed)


def sinusoid_baseline(grid, amplitudes, wavelengths, phases) -> np.ndarray:
    """``sum_k A_k sin(2 pi (x - phi_k) / lambda_k)`` evaluated on ``grid``."""
    x = np.asarray(grid, dtype=float)[:, None]
    a = np.atleast_1d(np.asarray(amplitudes, dtype=float))
    lam = np.atleast_1d(np.asarray(wavelengths, dtype=float))
    phi = np.atleast_1d(np.asarray(phases, dtype=float))
    return np.sum(a * np.sin(2 * np.pi * (x - phi) / lam), axis=1)


def baseline(bbn: BbnConfig, grid, rng, peak: float = 1.0) -> np.ndarray:
    """Draw a random sinusoid-sum baseline.

    The number of terms governs how many valleys the baseline has.
    """
    grid = np.asarray(grid, dtype=float)
    span = grid[-1] - grid[0]
    k = int(rng.integers(bbn.n_sinusoids_range[0], bbn.n_sinusoids_range[1] + 1))
    amps = rng.uniform(*bbn.amplitude_range, size=k) * peak
    lams = rng.uniform(*bbn.width_range, size=k) * span
    phases = rng.uniform(0.0, 1.0, size=k) * lams
    return sinusoid_baseline(grid, amps, lams, phases)


def _streams(seed):
    """Independent generators for the baseline and Gaussian components."""
    return (np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,))) for i in (0, 1))


def inject(s: Spectrum, cfg: NoiseConfig, calibrate: bool = True) -> NoisySample:
    """Apply the noise scenario in ``cfg`` to ``s``; a pure function of both."""
    bb_rng, gn_rng = _streams(cfg.seed)
    if cfg.scenario == "CLEAN":
        return NoisySample(s, s, "CLEAN", None, None, cfg.seed)
    y = s.intensities
    if cfg.scenario in ("BB", "GB"):
        y = y + baseline(cfg.bbn, s.wavenumbers, bb_rng, peak=float(np.max(np.abs(s.intensities))))
    target = measured = None
    if cfg.scenario in ("GN", "GB"):
        ps = signal_power(s)
        if ps == 0:
            raise ZeroSignal("signal power is zero; SNR undefined")
        noise = gaussian_noise(len(s), ps * 10.0 ** (-cfg.snr_db / 10.0), gn_rng, calibrate=calibrate)
        y = y + noise
        target, measured = float(cfg.snr_db), snr_db(ps, signal_power(noise))
    return NoisySample(s, s.replace(intensities=y), cfg.scenario, target, measured, cfg.seed)


# -- datasets ----------------------------------------------------------------


@dataclass(frozen=True)
class DatasetConfig:
    """How to expand clean originals into a noisy train/test dataset."""

    scenario: str = "GB"
    train_per_source: int = 20
    test_per_source: int = 5
    train_snr: tuple = (30.0, 80.0)
    test_snr: tuple = (1.0, 30.0)
    integer_snr: bool = False
    grid_length: int = DEFAULT_GRID_LENGTH
    bbn: BbnConfig = field(default_factory=BbnConfig)
    seed: int = 0
    calibrate: bool = True


@dataclass
class Dataset:
    samples: list
    manifest: DatasetManifest

    @property
    def class_names(self):
        return self.manifest.class_names

    def split(self, name):
        return [s for s, e in zip(self.samples, self.manifest.entries) if e.split == name]

    def labels(self, split=None) -> np.ndarray:
        return np.array([
            self.manifest.label_index(e.label)
            for e in self.manifest.entries
            if split is None or e.split == split
        ])

    def class_counts(self) -> dict:
        return {split: self.manifest.class_counts(split) for split in ("train", "test")}


def sample_seed(dataset_seed: int, counter: int) -> int:
    """Counter-based child seed, independent of generation order."""
    ss = np.random.SeedSequence(dataset_seed, spawn_key=(counter,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _draw_snr(seed, lo, hi, integer):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2,)))
    if integer:
        return float(rng.integers(int(np.ceil(lo)), int(np.floor(hi)) + 1))
    return float(rng.uniform(lo, hi))


def prepare_clean(s: Spectrum, grid_length: int) -> Spectrum:
    """Uniform grid, then [0, 1] normalization."""
    return resample(s, grid_length).normalize()


def build_dataset(manifest: DatasetManifest, cfg: DatasetConfig = DatasetConfig(), base_dir=".") -> Dataset:
    """Expand every clean source in ``manifest`` into noisy realizations.

    Each source contributes ``train_per_source`` samples with SNR drawn from
    ``train_snr`` and ``test_per_source`` samples from ``test_snr``.
    """
    counts = manifest.class_counts()
    empty = [c for c, n in counts.items() if n == 0]
    if empty:
        raise EmptyClass(f"no source spectra for classes {empty}")

    samples, entries = [], []
    counter = 0
    for src in manifest.entries:
        clean = prepare_clean(load_source(src, base_dir), cfg.grid_length)
        for split, n, (lo, hi) in (
            ("train", cfg.train_per_source, cfg.train_snr),
            ("test", cfg.test_per_source, cfg.test_snr),
        ):
            for r in range(n):
                seed = sample_seed(cfg.seed, counter)
                counter += 1
                snr = None
                if cfg.scenario in ("GN", "GB"):
                    snr = _draw_snr(seed, lo, hi, cfg.integer_snr)
                ncfg = NoiseConfig(cfg.scenario, snr, cfg.bbn, seed)
                sample = inject(clean, ncfg, calibrate=cfg.calibrate)
                sid = f"{src.id}-{split}-{r:03d}"
                sample = replace(sample, noisy=sample.noisy.replace(source_id=sid))
                samples.append(sample)
                entries.append(ManifestEntry(sid, src.source, src.label, split, cfg.scenario, snr, seed))
    return Dataset(samples, DatasetManifest(entries, manifest.class_names))


def _fmt(v):
    return "" if v is None else repr(v)


def save_dataset(ds: Dataset, directory) -> Path:
    """Persist as ``manifest.json`` + ``spectra/<id>.txt`` + ``index.csv``.

    The saved manifest points each entry at its noisy spectrum file.
    """
    directory = Path(directory)
    (directory / "spectra").mkdir(parents=True, exist_ok=True)
    entries = []
    with open(directory / "index.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(INDEX_FIELDS)
        for s, e in zip(ds.samples, ds.manifest.entries):
            rel = f"spectra/{e.id}.txt"
            write_rruff(s.noisy, directory / rel)
            entries.append(replace(e, source=rel))
            w.writerow([e.id, e.label, e.split, e.scenario, _fmt(s.target_snr_db), _fmt(s.measured_snr_db), e.seed])
    save_manifest(DatasetManifest(entries, ds.class_names), directory / "manifest.json")
    return directory


def read_index(path) -> list:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            for k in ("target_snr_db", "measured_snr_db"):
                row[k] = float(row[k]) if row[k] else None
            row["seed"] = int(row["seed"])
            rows.append(row)
    return rows


def load_dataset(directory) -> Dataset:
    """Inverse of :func:`save_dataset`. Clean spectra are not stored, so
    ``clean`` is set equal to the noisy spectrum."""
    directory = Path(directory)
    manifest = load_manifest(directory / "manifest.json")
    index = {row["id"]: row for row in read_index(directory / "index.csv")}
    samples = []
    for e in manifest.entries:
        s = read_rruff(directory / e.source).replace(label=e.label, source_id=e.id)
        row = index[e.id]
        samples.append(NoisySample(s, s, e.scenario, row["target_snr_db"], row["measured_snr_db"], e.seed))
    return Dataset(samples, manifest)
