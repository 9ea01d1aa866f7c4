import csv
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ramanwt.errors import EmptyInput, LabelOutOfRange
from ramanwt.evaluation import (
    REPORT_FIELDS,
    SWEEP_FIELDS,
    SweepCurve,
    SweepPoint,
    confusion,
    confusion_csv,
    emit_report,
    evaluate,
    metrics,
    read_sweep_csv,
    report_csv,
    snr_sweep,
    sweep_csv,
    threshold_snr,
)


def test_confusion_examples():
    y = np.array([0, 1] * 5)
    cm = confusion(y, y, 2)
    np.testing.assert_array_equal(cm, np.diag([5, 5]))
    assert metrics(cm).accuracy == 1.0
    cm = confusion(y, np.zeros(10, int), 2)
    assert cm[:, 0].sum() == 10 and cm[:, 1].sum() == 0
    with pytest.raises(LabelOutOfRange):
        confusion([0, 2], [0, 1], 2)
    with pytest.raises(LabelOutOfRange):
        confusion([0, 1], [0, -1], 2)


def test_metric_definitions():
    r = metrics([[3, 2], [1, 4]])
    assert r.precision[0] == pytest.approx(0.75, abs=1e-12)
    assert r.recall[0] == pytest.approx(0.6, abs=1e-12)
    assert r.f1[0] == pytest.approx(2 * 0.75 * 0.6 / 1.35, abs=1e-12)
    assert round(r.f1[0], 4) == 0.6667
    assert r.accuracy == 0.7 and r.n_samples == 10


def test_diagonal_and_never_predicted():
    r = metrics(np.diag([3, 4, 5]))
    for v in (r.precision, r.recall, r.f1):
        np.testing.assert_array_equal(v, 1.0)
    r = metrics([[2, 1, 0], [1, 3, 0], [0, 2, 0]])
    assert r.precision[2] == 0 and r.precision_undefined[2]
    assert r.recall[2] == 0 and not r.recall_undefined[2]
    assert np.all((r.f1 >= 0) & (r.f1 <= 1))
    assert r.macro_precision == pytest.approx(np.mean(r.precision))
    with pytest.raises(EmptyInput):
        metrics(np.zeros((0, 0)))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_permutation_equivariance(C, seed):
    rng = np.random.default_rng(seed)
    cm = rng.integers(0, 8, (C, C))
    p = rng.permutation(C)
    a = metrics(cm)
    b = metrics(cm[np.ix_(p, p)])
    for name in ("precision", "recall", "f1", "precision_undefined", "recall_undefined"):
        np.testing.assert_allclose(getattr(b, name), getattr(a, name)[p])
    assert b.accuracy == pytest.approx(a.accuracy)
    assert b.macro_f1 == pytest.approx(a.macro_f1)
    assert a.confusion.sum() == a.n_samples


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_accuracy_is_micro_recall_on_balanced(C, n, seed):
    rng = np.random.default_rng(seed)
    y = np.repeat(np.arange(C), n)
    r = evaluate(y, rng.integers(0, C, y.size), C)
    assert r.accuracy == pytest.approx(np.mean(r.recall), abs=1e-12)


# -- sweeps ------------------------------------------------------------------


def make_generator(C=5, n=40):
    def generate(snr):
        rng = np.random.default_rng(int(snr * 100))
        labels = np.repeat(np.arange(C), n // C)
        inputs = labels + rng.normal(0, 3.0 / (1 + snr), labels.size)
        return inputs, labels

    return generate


def test_sweep_oracle_and_majority():
    labels = np.repeat(np.arange(5), 8)
    curves = snr_sweep(
        {"oracle": lambda x: x.astype(int), "majority": lambda x: np.zeros(len(x), int)},
        lambda s: (labels.astype(float), labels),
        [0, 10, 20],
    )
    assert [p.accuracy for p in curves[0].points] == [1.0, 1.0, 1.0]
    assert [p.accuracy for p in curves[1].points] == [0.2, 0.2, 0.2]
    assert curves[0].classifier_kind == "oracle" and curves[0].scenario == "GN"


def test_sweep_recount_and_shared_inputs():
    gen = make_generator()
    seen = []

    def spy(x):
        seen.append(x.copy())
        return np.rint(x).astype(int)

    curves = snr_sweep({"a": spy, "b": spy}, gen, [30, 0, 10])
    assert [p.snr_db for p in curves[0].points] == [0.0, 10.0, 30.0]
    # both models saw the same inputs at every point
    for i in range(0, len(seen), 2):
        np.testing.assert_array_equal(seen[i], seen[i + 1])
    for c in curves:
        for p in c.points:
            x, y = gen(p.snr_db)
            assert p.accuracy == np.sum(np.rint(x).astype(int) == y) / y.size
            assert p.n_samples == y.size
    with pytest.raises(ValueError):
        snr_sweep({"a": spy}, gen, [5])


def test_threshold_snr():
    c = SweepCurve("x", "GN", [SweepPoint(0, 0.5, 10), SweepPoint(10, 0.8, 10), SweepPoint(20, 1.0, 10)])
    assert threshold_snr(c, 0.9) == pytest.approx(15.0)
    assert threshold_snr(c, 0.4) == 0.0
    assert threshold_snr(c, 0.8) == 10.0
    assert threshold_snr(SweepCurve("x", "GN", [SweepPoint(0, 0.1, 1), SweepPoint(5, 0.2, 1)]), 0.9) is None


# -- output ------------------------------------------------------------------


def test_report_csv_reparse():
    r = metrics([[3, 2], [1, 4]], ("A", "B"))
    rows = list(csv.DictReader(report_csv(r).splitlines()))
    assert tuple(rows[0]) == REPORT_FIELDS
    assert float(rows[0]["precision"]) == r.precision[0]
    assert float(rows[1]["f1"]) == r.f1[1]
    assert rows[2]["class"] == "macro" and float(rows[2]["f1"]) == r.macro_f1
    cm_rows = list(csv.reader(confusion_csv(r).splitlines()))
    assert [[int(v) for v in row[1:]] for row in cm_rows[1:]] == [[3, 2], [1, 4]]


def test_sweep_csv_roundtrip(tmp_path):
    curves = [
        SweepCurve("knn", "GN", [SweepPoint(0.0, 0.35, 40), SweepPoint(5.0, 2 / 3, 40)]),
        SweepCurve("dcnn", "GN", [SweepPoint(0.0, 0.9, 40), SweepPoint(5.0, 1.0, 40)]),
    ]
    text = sweep_csv(curves)
    assert text.splitlines()[0] == ",".join(SWEEP_FIELDS)
    (tmp_path / "s.csv").write_text(text)
    back = read_sweep_csv(tmp_path / "s.csv")
    assert back == curves
    with pytest.raises(EmptyInput):
        sweep_csv([SweepCurve("knn", "GN", [])])


def test_emit_report_files_deterministic(tmp_path):
    r = metrics([[5, 1, 0], [0, 6, 0], [2, 0, 4]], ("Albite", "Forsterite", "Grossular"))
    curves = [SweepCurve("nb", "GB", [SweepPoint(0, 0.3, 5), SweepPoint(5, 0.6, 5)])]
    a = emit_report(r, tmp_path / "a", "eval_x") + emit_report(curves, tmp_path / "a", "sweep_x")
    b = emit_report(r, tmp_path / "b", "eval_x") + emit_report(curves, tmp_path / "b", "sweep_x")
    assert [p.name for p in a] == [p.name for p in b]
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()
        if pa.suffix == ".svg":
            assert ET.fromstring(pa.read_bytes()).tag.endswith("svg")
    with pytest.raises(EmptyInput):
        emit_report([SweepCurve("nb", "GB", [])], tmp_path / "c", "x")
    with pytest.raises(EmptyInput):
        emit_report([], tmp_path / "c", "x")


def test_emit_report_io_error_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="file"):
        emit_report(metrics(np.eye(2, dtype=int)), blocker, "x")
