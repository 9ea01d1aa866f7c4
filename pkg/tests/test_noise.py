import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ramanwt.demo import demo_manifest, demo_spectrum
from ramanwt.errors import EmptyClass, ZeroSignal
from ramanwt.noise import (
    INDEX_FIELDS,
    BbnConfig,
    DatasetConfig,
    NoiseConfig,
    awgn,
    baseline,
    build_dataset,
    gaussian_noise,
    inject,
    load_dataset,
    prepare_clean,
    sample_seed,
    save_dataset,
    signal_power,
    sinusoid_baseline,
    snr_db,
)
from ramanwt.spectrum import DatasetManifest, ManifestEntry, Spectrum


def unit_power_signal(n=1024):
    x = np.arange(n, dtype=float)
    y = np.sqrt(2) * np.sin(2 * np.pi * x / 64)  # mean square exactly 1 over whole periods
    return Spectrum(x, y)


def test_signal_power_examples():
    assert signal_power(np.ones(100)) == 1.0
    assert signal_power(np.tile([1.0, -1.0], 50)) == 1.0
    v = np.random.default_rng(3).normal(size=777)
    oracle = sum(float(a) * float(a) for a in v) / len(v)
    assert abs(signal_power(v) - oracle) < 1e-12
    assert signal_power(unit_power_signal()) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("target,pn", [(30.0, 1e-3), (20.0, 1e-2)])
def test_awgn_noise_power(target, pn):
    s = unit_power_signal()
    out = awgn(s, target, np.random.default_rng(0))
    noise = out.noisy.intensities - s.intensities
    assert np.mean(noise**2) == pytest.approx(pn, rel=1e-12)
    assert out.measured_snr_db == pytest.approx(target, abs=1e-9)


def test_awgn_raw_monte_carlo():
    # raw i.i.d. draws: the measured SNR concentrates around the target
    s = unit_power_signal()
    rng = np.random.default_rng(11)
    measured = [awgn(s, 10.0, rng, calibrate=False).measured_snr_db for _ in range(10_000)]
    assert abs(np.mean(measured) - 10.0) <= 0.3
    # and the raw draw is not rescaled
    assert np.std(measured) > 0.05


def test_awgn_zero_signal():
    with pytest.raises(ZeroSignal):
        awgn(Spectrum(np.arange(20.0), np.zeros(20)), 10, np.random.default_rng(0))


@settings(max_examples=40, deadline=None)
@given(st.floats(-10, 90), st.integers(1024, 4096), st.integers(0, 2**32 - 1))
def test_gn_power_ratio_property(snr, n, seed):
    rng = np.random.default_rng(seed)
    y = rng.uniform(0, 1, n)
    s = Spectrum(np.arange(n, dtype=float), y)
    out = inject(s, NoiseConfig("GN", snr, seed=seed))
    noise = out.noisy.intensities - y
    ratio = np.mean(noise**2) / signal_power(s)
    assert abs(ratio / 10 ** (-snr / 10) - 1) < 0.05
    assert abs(out.measured_snr_db - snr) <= 0.3


def test_snr_db():
    assert snr_db(1.0, 1e-3) == pytest.approx(30.0)


def test_gaussian_noise_zero_mean():
    n = gaussian_noise(200_000, 0.5, np.random.default_rng(5), calibrate=False)
    assert abs(n.mean()) < 5 * np.sqrt(0.5 / 200_000)
    assert np.var(n) == pytest.approx(0.5, rel=0.02)


# -- baseline ------------------------------------------------------------------


def count_minima(y):
    d = np.diff(y)
    s = np.sign(d[d != 0])
    return int(np.count_nonzero((s[:-1] < 0) & (s[1:] > 0)))


def test_one_sinusoid_one_valley():
    grid = np.linspace(0, 1000, 2001)
    b = sinusoid_baseline(grid, [1.0], [1000.0], [0.0])
    np.testing.assert_allclose(b, np.sin(2 * np.pi * grid / 1000), atol=1e-12)
    assert count_minima(b) == 1


def test_opposite_phase_cancels():
    grid = np.linspace(0, 700, 1024)
    b = sinusoid_baseline(grid, [0.7, 0.7], [300.0, 300.0], [0.0, 150.0])
    assert np.max(np.abs(b)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 16))
def test_valley_count_bounded_by_periods(seed, kmax):
    grid = np.linspace(150, 1250, 1024)
    span = grid[-1] - grid[0]
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, kmax + 1))
    lams = rng.uniform(0.2, 1.0, k) * span
    b = sinusoid_baseline(grid, rng.uniform(0.1, 1.0, k), lams, rng.uniform(0, 1, k) * lams)
    assert count_minima(b) <= int(np.sum(np.ceil(span / lams)))


def test_baseline_draw_ranges():
    grid = np.linspace(0, 1, 512)
    cfg = BbnConfig((3, 3), (0.5, 0.5), (1.0, 1.0))
    b = baseline(cfg, grid, np.random.default_rng(0), peak=2.0)
    assert np.max(np.abs(b)) <= 3 * 0.5 * 2.0 + 1e-12


def test_bbn_config_validation():
    for bad in (dict(n_sinusoids_range=(0, 3)), dict(n_sinusoids_range=(1, 17)),
                dict(amplitude_range=(0.0, 1.0)), dict(amplitude_range=(0.5, 2.5)),
                dict(width_range=(0.5, 1.5))):
        with pytest.raises(ValueError):
            BbnConfig(**bad)
    with pytest.raises(ValueError):
        NoiseConfig("XX", 10)
    with pytest.raises(ValueError):
        NoiseConfig("GN", None)


# -- inject ------------------------------------------------------------------


def test_inject_clean_identity():
    s = prepare_clean(demo_spectrum("Albite"), 1024)
    assert inject(s, NoiseConfig("CLEAN", None, seed=4)).noisy == s


def test_inject_gb_high_snr_tiny_baseline_correlates():
    s = prepare_clean(demo_spectrum("Albite"), 1024)
    cfg = NoiseConfig("GB", 80.0, BbnConfig((1, 2), (1e-4, 1e-4), (0.5, 1.0)), seed=9)
    out = inject(s, cfg)
    r = np.corrcoef(out.noisy.intensities, s.intensities)[0, 1]
    assert r > 0.999


def test_inject_deterministic_and_streams_independent():
    s = prepare_clean(demo_spectrum("Marialite"), 1024)
    a = inject(s, NoiseConfig("GB", 12.0, seed=77))
    b = inject(s, NoiseConfig("GB", 12.0, seed=77))
    assert a.noisy == b.noisy
    # the BB realization is the baseline component of GB with the same seed
    bb = inject(s, NoiseConfig("BB", None, seed=77)).noisy.intensities - s.intensities
    gn = inject(s, NoiseConfig("GN", 12.0, seed=77)).noisy.intensities - s.intensities
    np.testing.assert_allclose(a.noisy.intensities - s.intensities, bb + gn, atol=1e-12)
    assert a.measured_snr_db == pytest.approx(12.0, abs=1e-9)
    c = inject(s, NoiseConfig("GB", 12.0, seed=78))
    assert c.noisy != a.noisy


# -- datasets ----------------------------------------------------------------


def test_build_dataset_counts_and_ranges():
    m = demo_manifest(12)
    ds = build_dataset(m, DatasetConfig(train_per_source=20, test_per_source=0, seed=1))
    assert len(ds.samples) == 1200
    assert ds.class_counts()["train"] == {c: 240 for c in m.class_names}
    ds = build_dataset(demo_manifest(2), DatasetConfig(train_per_source=10, test_per_source=10, seed=2))
    snr = {e.split: [] for e in ds.manifest.entries}
    for e in ds.manifest.entries:
        snr[e.split].append(e.snr_db)
    assert 30 <= min(snr["train"]) and max(snr["train"]) <= 80
    assert 1 <= min(snr["test"]) and max(snr["test"]) <= 30
    ids = [e.id for e in ds.manifest.entries]
    assert len(set(ids)) == len(ids)


def test_build_dataset_integer_snr():
    ds = build_dataset(demo_manifest(1), DatasetConfig(train_per_source=3, test_per_source=5, integer_snr=True))
    assert all(float(e.snr_db).is_integer() for e in ds.manifest.entries)


def test_build_dataset_empty_class():
    m = DatasetManifest([ManifestEntry("a", "synth:Albite/0", "Albite")], ("Albite", "Forsterite"))
    with pytest.raises(EmptyClass):
        build_dataset(m)


def test_sample_seed_counter_based():
    assert sample_seed(5, 3) == sample_seed(5, 3)
    assert len({sample_seed(5, i) for i in range(100)}) == 100


def test_dataset_save_load(tmp_path):
    ds = build_dataset(demo_manifest(1), DatasetConfig(train_per_source=2, test_per_source=1, seed=3))
    save_dataset(ds, tmp_path)
    with open(tmp_path / "index.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == INDEX_FIELDS
    assert len(rows) == 1 + len(ds.samples)
    back = load_dataset(tmp_path)
    assert [s.noisy for s in back.samples] == [s.noisy for s in ds.samples]
    assert back.manifest.class_names == ds.manifest.class_names
    np.testing.assert_array_equal(back.labels(), ds.labels())
