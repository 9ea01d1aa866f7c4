import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ramanwt.demo import CLASS_NAMES, DEMO_GRID, demo_manifest, demo_spectrum
from ramanwt.errors import (
    DuplicateWavenumberWarning,
    InvalidPeak,
    MalformedLine,
    NonFinite,
    SchemaError,
    TooShort,
)
from ramanwt.spectrum import (
    DatasetManifest,
    ManifestEntry,
    Peak,
    Spectrum,
    format_rruff,
    load_manifest,
    load_source,
    lorentzian_sum,
    parse_rruff,
    read_rruff,
    resample,
    save_manifest,
    synth_lorentzian,
    write_rruff,
)

# A hand-made file in the RRUFF layout: metadata headers, comma rows,
# a whitespace row, a blank line and the END marker.
RRUFF_FIXTURE = """##NAMES=Actinolite
##RRUFFID=R040063
##LOCALITY=Somewhere
##DESCRIPTION=Raman data, processed
150.1, 10.5
151.0, 11.25
152.2, 13.0
153.1, 17.5
154.0, 22.0
155.3, 35.75
156.1, 60.0
157.2, 42.0
158.0, 30.1
159.4, 21.0
160.0, 15.0
161.1, 12.2
162.2, 11.0
163.0, 10.7
164.4  10.6

165.2, 10.55
166.0, 10.5
##END=
"""


def line_count_oracle(text):
    return sum(1 for ln in text.splitlines() if ln.strip() and not ln.startswith("#"))


def test_parse_rruff_fixture():
    s = parse_rruff(RRUFF_FIXTURE)
    assert len(s) == line_count_oracle(RRUFF_FIXTURE) == 17
    assert s.label == "Actinolite"
    assert s.source_id == "R040063"
    assert s.metadata["LOCALITY"] == "Somewhere"
    assert "END" not in s.metadata
    assert s.wavenumbers[0] == 150.1 and s.intensities[6] == 60.0
    assert s.wavenumbers[14] == 164.4


def test_parse_sorts_ascending():
    rows = [f"{x}, {x * 2}" for x in range(40, 20, -1)]
    s = parse_rruff("\n".join(rows))
    assert np.all(np.diff(s.wavenumbers) > 0)
    np.testing.assert_array_equal(s.intensities, 2 * s.wavenumbers)


def test_parse_errors():
    good = [f"{100 + i}, {i}" for i in range(20)]
    with pytest.raises(MalformedLine) as err:
        parse_rruff("\n".join(good[:5] + ["abc, 1"] + good[5:]))
    assert err.value.line_no == 6
    with pytest.raises(NonFinite):
        parse_rruff("\n".join(good + ["500, nan"]))
    with pytest.raises(TooShort):
        parse_rruff("\n".join(good[:15]))


def test_duplicate_wavenumber_keeps_first():
    rows = [f"{100 + i}, {i}" for i in range(20)] + ["105, 999"]
    with pytest.warns(DuplicateWavenumberWarning):
        s = parse_rruff("\n".join(rows))
    assert len(s) == 20
    assert s.intensities[5] == 5.0


def test_spectrum_invariants():
    x = np.arange(20.0)
    with pytest.raises(TooShort):
        Spectrum(x[:10], x[:10])
    with pytest.raises(ValueError):
        Spectrum(x[::-1], x)
    with pytest.raises(ValueError):
        Spectrum(x, x[:19])
    with pytest.raises(NonFinite):
        Spectrum(x, np.where(x == 3, np.inf, x))
    s = Spectrum(x, x)
    with pytest.raises(ValueError):
        s.intensities[0] = 5.0


def test_normalize():
    x = np.linspace(0, 1, 32)
    s = Spectrum(x, 3 + 5 * np.sin(7 * x)).normalize()
    assert abs(s.intensities.max() - 1) < 1e-12 and abs(s.intensities.min()) < 1e-12
    flat = Spectrum(x, np.full(32, 2.0))
    assert flat.normalize() == flat


def test_rruff_roundtrip(tmp_path):
    s = parse_rruff(RRUFF_FIXTURE)
    path = tmp_path / "a.txt"
    write_rruff(s, path)
    back = read_rruff(path)
    assert back == s
    assert parse_rruff(format_rruff(back)) == back


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=16, max_size=60, unique=True),
    st.integers(0, 2**32 - 1),
)
def test_parse_serialize_idempotent(xs, seed):
    rng = np.random.default_rng(seed)
    s = Spectrum(np.sort(xs), rng.normal(size=len(xs)), label="Albite", source_id="p")
    once = parse_rruff(format_rruff(s))
    assert once == s
    assert parse_rruff(format_rruff(once)) == once


# -- synthesis ---------------------------------------------------------------


def test_single_peak_argmax():
    grid = np.arange(0.0, 1001.0)
    s = synth_lorentzian([Peak(500, 10, 1)], grid)
    assert s.wavenumbers[np.argmax(s.intensities)] == 500.0
    grid = np.linspace(0, 1000, 77)
    s = synth_lorentzian([Peak(500, 10, 1)], grid)
    assert np.argmax(s.intensities) == np.argmin(np.abs(grid - 500))


def test_lorentzian_half_height():
    # closed form h w^2 / ((x - c)^2 + w^2) evaluated directly
    c, w, h = 412.5, 7.25, 3.0
    for x in (c - w, c + w):
        assert lorentzian_sum([Peak(c, w, h)], np.array([x]))[0] == pytest.approx(h / 2, rel=1e-14)
        expected = h * w**2 / ((x - c) ** 2 + w**2)
        assert lorentzian_sum([Peak(c, w, h)], np.array([x]))[0] == pytest.approx(expected, rel=1e-15)


def test_synth_invalid():
    grid = np.arange(100.0)
    for bad in ([Peak(50, 0, 1)], [Peak(50, 3, -1)], []):
        with pytest.raises(InvalidPeak):
            synth_lorentzian(bad, grid)


# -- resampling ----------------------------------------------------------------


def test_resample_linear_exact():
    x = np.sort(np.random.default_rng(1).uniform(0, 100, 50))
    s = resample(Spectrum(x, 2 * x + 1), 300)
    assert s.wavenumbers[0] == x[0] and s.wavenumbers[-1] == x[-1]
    np.testing.assert_allclose(s.intensities, 2 * s.wavenumbers + 1, rtol=0, atol=1e-12)
    assert s.is_uniform


def test_resample_identity_on_uniform():
    x = np.linspace(10, 20, 64)
    y = np.cos(x)
    np.testing.assert_allclose(resample(Spectrum(x, y), 64).intensities, y, atol=1e-12)


def test_resample_peak_argmax():
    s = demo_spectrum("Forsterite")
    r = resample(s, 1024)
    step = r.wavenumbers[1] - r.wavenumbers[0]
    assert abs(r.wavenumbers[np.argmax(r.intensities)] - s.wavenumbers[np.argmax(s.intensities)]) <= step


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(16, 400), st.integers(16, 2048))
def test_resample_extrema_property(seed, n_in, n_out):
    rng = np.random.default_rng(seed)
    x = np.cumsum(rng.uniform(0.1, 2.0, n_in))
    y = rng.normal(size=n_in)
    r = resample(Spectrum(x, y), n_out)
    slope = np.max(np.abs(np.diff(y) / np.diff(x)))
    step = r.wavenumbers[1] - r.wavenumbers[0]
    tol = slope * step + 1e-12
    assert r.intensities.max() <= y.max() + 1e-12 and r.intensities.max() >= y.max() - tol
    assert r.intensities.min() >= y.min() - 1e-12 and r.intensities.min() <= y.min() + tol


@settings(max_examples=30, deadline=None)
@given(
    st.lists(
        st.tuples(st.floats(200, 1200), st.floats(0.5, 50), st.floats(0.01, 10)),
        min_size=1,
        max_size=8,
    )
)
def test_synthetic_spectra_satisfy_invariants(peaks):
    s = synth_lorentzian([Peak(*p) for p in peaks], DEMO_GRID)
    assert np.all(np.diff(s.wavenumbers) > 0) and len(s) >= 16
    assert np.all(np.isfinite(s.intensities))
    if np.ptp(lorentzian_sum([Peak(*p) for p in peaks], DEMO_GRID)) > 0:
        assert abs(s.intensities.max() - 1) < 1e-12 and abs(s.intensities.min()) < 1e-12


# -- manifests -----------------------------------------------------------------


def test_manifest_roundtrip(tmp_path):
    m = demo_manifest(12)
    assert len(m.entries) == 60 and m.class_names == CLASS_NAMES
    assert all(n == 12 for n in m.class_counts().values())
    save_manifest(m, tmp_path / "m.json")
    assert load_manifest(tmp_path / "m.json") == m
    doc = json.loads((tmp_path / "m.json").read_text())
    assert doc["format"] == "ramanwt-manifest"
    assert set(doc["entries"][0]) == {"id", "source", "label", "split", "scenario", "snr_db", "seed"}


def test_manifest_schema_errors():
    e = [ManifestEntry("a", "synth:Albite/0", "Albite"), ManifestEntry("b", "synth:Albite/1", "Quartz")]
    with pytest.raises(SchemaError) as err:
        DatasetManifest(e, ("Albite", "Forsterite"))
    assert err.value.entry == 1
    with pytest.raises(SchemaError):
        DatasetManifest(e[:1], ("Albite",))
    with pytest.raises(SchemaError):
        DatasetManifest([e[0], e[0]], ("Albite", "Forsterite"))


def test_load_source_file_and_synth(tmp_path):
    (tmp_path / "x.txt").write_text(RRUFF_FIXTURE)
    s = load_source(ManifestEntry("x", "x.txt", "Actinolite"), tmp_path)
    assert len(s) == 17
    g = load_source(ManifestEntry("g", "synth:Grossular/3", "Grossular"), tmp_path)
    assert g.source_id == "g"
    assert g.replace(source_id="") == demo_spectrum("Grossular", 3).replace(source_id="")
    assert g.replace(source_id="") != demo_spectrum("Grossular", 0).replace(source_id="")


def test_no_warnings_on_clean_parse():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        parse_rruff(RRUFF_FIXTURE)
