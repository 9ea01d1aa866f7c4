"""Confusion matrices, precision/recall/F1, accuracy-vs-SNR sweeps and
their CSV/SVG output."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import EmptyInput, LabelOutOfRange

REPORT_FIELDS = ("class", "precision", "recall", "f1", "support", "predicted", "precision_undefined", "recall_undefined")
SWEEP_FIELDS = ("classifier_kind", "scenario", "snr_db", "accuracy", "n_samples")


def confusion(actual, predicted, n_classes: int) -> np.ndarray:
    """Counts with rows = actual class, columns = predicted class."""
    actual = np.asarray(actual, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if actual.shape != predicted.shape:
        raise ValueError("actual and predicted must have equal length")
    for name, a in (("actual", actual), ("predicted", predicted)):
        if a.size and (a.min() < 0 or a.max() >= n_classes):
            raise LabelOutOfRange(f"{name} labels must lie in [0, {n_classes})")
    m = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(m, (actual, predicted), 1)
    return m


def _ratio(num, den):
    undefined = den == 0
    return np.where(undefined, 0.0, num / np.where(undefined, 1, den)), undefined


@dataclass
class EvalReport:
    """Per-class and macro metrics of one confusion matrix.

    Ratios with a zero denominator are reported as 0 and flagged in
    ``precision_undefined`` / ``recall_undefined``.
    """

    confusion: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    precision_undefined: np.ndarray
    recall_undefined: np.ndarray
    accuracy: float
    n_samples: int
    class_names: tuple = ()

    @property
    def macro_precision(self) -> float:
        return float(self.precision.mean())

    @property
    def macro_recall(self) -> float:
        return float(self.recall.mean())

    @property
    def macro_f1(self) -> float:
        return float(self.f1.mean())

    def normalized(self) -> np.ndarray:
        """Row-normalized confusion (recall view); empty rows stay zero."""
        rows = self.confusion.sum(axis=1, keepdims=True)
        return np.divide(self.confusion, rows, out=np.zeros(self.confusion.shape), where=rows > 0)


def metrics(cm, class_names=()) -> EvalReport:
    cm = np.asarray(cm, dtype=np.int64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.shape[0] == 0:
        raise EmptyInput("confusion matrix must be non-empty and square")
    tp = np.diag(cm).astype(float)
    predicted = cm.sum(axis=0)
    support = cm.sum(axis=1)
    precision, p_undef = _ratio(tp, predicted)
    recall, r_undef = _ratio(tp, support)
    f1, _ = _ratio(2 * precision * recall, precision + recall)
    total = int(cm.sum())
    accuracy = float(tp.sum() / total) if total else 0.0
    names = tuple(class_names) or tuple(str(i) for i in range(cm.shape[0]))
    return EvalReport(cm, precision, recall, f1, p_undef, r_undef, accuracy, total, names)


def evaluate(actual, predicted, n_classes, class_names=()) -> EvalReport:
    return metrics(confusion(actual, predicted, n_classes), class_names)


# -- sweeps ------------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    snr_db: float
    accuracy: float
    n_samples: int


@dataclass
class SweepCurve:
    classifier_kind: str
    scenario: str
    points: list = field(default_factory=list)

    def __post_init__(self):
        self.points = sorted(self.points, key=lambda p: p.snr_db)

    @property
    def snr_db(self) -> np.ndarray:
        return np.array([p.snr_db for p in self.points])

    @property
    def accuracy(self) -> np.ndarray:
        return np.array([p.accuracy for p in self.points])


def snr_sweep(
    models: Mapping[str, Callable],
    generate: Callable,
    snr_points: Sequence[float],
    scenario: str = "GN",
) -> list:
    """Accuracy of every model at every SNR point.

    Parameters
    ----------
    models : mapping of name -> ``predict(inputs) -> labels`` callable
    generate : ``generate(snr_db) -> (inputs, labels)``; called once per
        point and shared by all models, so it should seed itself from
        ``snr_db`` for reproducibility.
    snr_points : at least two SNR values (dB)
    """
    snr_points = sorted(float(s) for s in snr_points)
    if len(snr_points) < 2:
        raise ValueError("a sweep needs at least two SNR points")
    if not models:
        raise EmptyInput("no models to sweep")
    curves = {name: SweepCurve(name, scenario) for name in models}
    for snr in snr_points:
        inputs, labels = generate(snr)
        labels = np.asarray(labels)
        for name, predict in models.items():
            pred = np.asarray(predict(inputs))
            acc = float(np.mean(pred == labels)) if labels.size else 0.0
            curves[name].points.append(SweepPoint(snr, acc, int(labels.size)))
    return list(curves.values())


def threshold_snr(curve: SweepCurve, level: float):
    """Smallest SNR at which accuracy reaches ``level``, interpolating
    linearly between neighbouring points; ``None`` if never reached."""
    s, a = curve.snr_db, curve.accuracy
    if s.size == 0:
        raise EmptyInput("empty curve")
    if a[0] >= level:
        return float(s[0])
    for i in range(1, s.size):
        if a[i] >= level:
            return float(s[i - 1] + (level - a[i - 1]) * (s[i] - s[i - 1]) / (a[i] - a[i - 1]))
    return None


# -- output ------------------------------------------------------------------


def _num(v) -> str:
    return repr(float(v))


def report_csv(report: EvalReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_FIELDS)
    support = report.confusion.sum(axis=1)
    predicted = report.confusion.sum(axis=0)
    for i, name in enumerate(report.class_names):
        w.writerow([name, _num(report.precision[i]), _num(report.recall[i]), _num(report.f1[i]),
                    int(support[i]), int(predicted[i]), int(report.precision_undefined[i]), int(report.recall_undefined[i])])
    w.writerow(["macro", _num(report.macro_precision), _num(report.macro_recall), _num(report.macro_f1),
                report.n_samples, report.n_samples, 0, 0])
    w.writerow(["accuracy", _num(report.accuracy), _num(report.accuracy), _num(report.accuracy),
                report.n_samples, report.n_samples, 0, 0])
    return buf.getvalue()


def confusion_csv(report: EvalReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["actual\\predicted", *report.class_names])
    for name, row in zip(report.class_names, report.confusion):
        w.writerow([name, *map(int, row)])
    return buf.getvalue()


def sweep_csv(curves) -> str:
    if not curves or any(not c.points for c in curves):
        raise EmptyInput("nothing to write: empty sweep curve")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_FIELDS)
    for c in curves:
        for p in c.points:
            w.writerow([c.classifier_kind, c.scenario, _num(p.snr_db), _num(p.accuracy), p.n_samples])
    return buf.getvalue()


def read_sweep_csv(path) -> list:
    curves = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            key = (row["classifier_kind"], row["scenario"])
            curves.setdefault(key, []).append(
                SweepPoint(float(row["snr_db"]), float(row["accuracy"]), int(row["n_samples"])))
    return [SweepCurve(k, s, pts) for (k, s), pts in curves.items()]


def _svg(fig) -> str:
    import matplotlib.pyplot as plt

    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return buf.getvalue()


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "ramanwt"
    plt.rcParams["svg.fonttype"] = "none"
    return plt


def confusion_svg(report: EvalReport, title: str = "") -> str:
    """Heatmap; predicted label on x, actual label on y."""
    plt = _pyplot()
    n = len(report.class_names)
    fig, ax = plt.subplots(figsize=(1.2 * n + 2, 1.2 * n + 1.5))
    ax.imshow(report.normalized(), cmap="Blues", vmin=0, vmax=1)
    for i in range(n):
        for j in range(n):
            ax.text(j, i, str(report.confusion[i, j]), ha="center", va="center")
    ax.set_xticks(range(n), report.class_names, rotation=45, ha="right")
    ax.set_yticks(range(n), report.class_names)
    ax.set_xlabel("Predicted label")
    ax.set_ylabel("Actual label")
    ax.set_title(title or f"accuracy {report.accuracy:.4f}")
    fig.tight_layout()
    return _svg(fig)


def sweep_svg(curves, title: str = "") -> str:
    if not curves or any(not c.points for c in curves):
        raise EmptyInput("nothing to plot: empty sweep curve")
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for c in curves:
        ax.plot(c.snr_db, c.accuracy, marker="o", label=c.classifier_kind.upper())
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("Accuracy")
    ax.set_ylim(0, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend()
    ax.set_title(title or f"scenario {curves[0].scenario}")
    fig.tight_layout()
    return _svg(fig)


def _write(path, text):
    path = Path(path)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def emit_report(obj, directory, stem: str) -> list:
    """Write CSV tables and SVG plots for an EvalReport or a list of
    SweepCurves; returns the written paths. Output bytes depend only on
    the inputs."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if isinstance(obj, EvalReport):
        return [
            _write(directory / f"{stem}_metrics.csv", report_csv(obj)),
            _write(directory / f"{stem}_confusion.csv", confusion_csv(obj)),
            _write(directory / f"{stem}_confusion.svg", confusion_svg(obj)),
        ]
    curves = list(obj)
    return [
        _write(directory / f"{stem}_sweep.csv", sweep_csv(curves)),
        _write(directory / f"{stem}_sweep.svg", sweep_svg(curves)),
    ]
