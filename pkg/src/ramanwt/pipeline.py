"""End-to-end pipeline stages behind the command-line interface.

A run directory holds one sub-directory per stage::

    <out>/dataset/   manifest.json, index.csv, spectra/, sources/   (synth)
    <out>/images/    <id>.png, images.npz                          (transform)
    <out>/models/    <kind>.npz                                    (train)
    <out>/reports/   <stem>_*.csv, <stem>_*.svg                    (eval, sweep)

Each stage writes ``resolved_config.json`` next to its outputs. The run id
is a hash of the resolved configuration with the output path left out, so
two runs of the same configuration produce the same file names and bytes.
"""

from __future__ import annotations

import contextlib
import dataclasses
import hashlib
import json
import logging
import os
import shutil
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classifiers import ML_KINDS, feature_matrix, make_classifier
from .cwt import DEFAULT_SCALES, ScalogramImage, cwt, default_scales, render, save_png
from .demo import demo_manifest
from .errors import DataError, EmptyInput
from .evaluation import emit_report, evaluate, snr_sweep
from .noise import BbnConfig, DatasetConfig, build_dataset, load_dataset, save_dataset
from .serialization import load_model, save_model
from .spectrum import (
    DEFAULT_GRID_LENGTH,
    SCENARIOS,
    DatasetManifest,
    ManifestEntry,
    load_manifest,
    load_source,
    read_rruff,
    save_manifest,
    write_rruff,
)

log = logging.getLogger(__name__)

KINDS = ML_KINDS + ("dcnn",)

DEFAULT_HYPERPARAMS = {
    "nb": {"var_smoothing": 1e-9},
    "knn": {"k": 5},
    "rf": {"n_trees": 100, "max_depth": 16, "max_features": "sqrt", "bootstrap": True},
    "svm": {"C": 10.0, "kernel": "rbf", "gamma": None, "tol": 1e-3, "max_iter": 100000},
    "dcnn": {"epochs": 30, "batch_size": 32, "lr": 0.01, "optimizer": "sgd"},
}


@dataclass
class RunConfig:
    """Everything a run depends on. Loaded from JSON; missing keys take
    these defaults and unknown keys are rejected."""

    out: str = "run"
    seed: int = 0
    manifest: str | None = None  # None: bundled synthetic classes
    n_originals: int = 12  # per class, bundled data only
    scenario: str = "GB"
    train_per_source: int = 13
    test_per_source: int = 5
    train_snr: tuple = (30.0, 80.0)
    test_snr: tuple = (1.0, 30.0)
    integer_snr: bool = False  # draw whole-dB SNRs instead of continuous ones
    grid_length: int = DEFAULT_GRID_LENGTH
    n_scales: int = DEFAULT_SCALES
    image_side: int = 64
    bbn: dict = field(default_factory=lambda: dataclasses.asdict(BbnConfig()))
    classifier: str = "knn"
    classifiers: dict = field(default_factory=lambda: json.loads(json.dumps(DEFAULT_HYPERPARAMS)))
    sweep_scenario: str = "GN"
    sweep_snr: tuple = (0.0, 30.0)
    sweep_step: float = 5.0
    sweep_per_source: int = 2

    def __post_init__(self):
        self.train_snr = tuple(float(v) for v in self.train_snr)
        self.test_snr = tuple(float(v) for v in self.test_snr)
        self.sweep_snr = tuple(float(v) for v in self.sweep_snr)
        merged = json.loads(json.dumps(DEFAULT_HYPERPARAMS))
        for kind, hp in (self.classifiers or {}).items():
            if kind not in KINDS:
                raise ValueError(f"unknown classifier kind {kind!r} in classifiers")
            merged[kind].update(hp)
        self.classifiers = merged
        self.bbn = {**dataclasses.asdict(BbnConfig()), **(self.bbn or {})}
        self.validate()

    def validate(self):
        for name in ("scenario", "sweep_scenario"):
            if getattr(self, name) not in SCENARIOS:
                raise ValueError(f"{name} must be one of {SCENARIOS}")
        if self.classifier not in KINDS:
            raise ValueError(f"classifier must be one of {KINDS}")
        for name in ("train_snr", "test_snr", "sweep_snr"):
            pair = getattr(self, name)
            if len(pair) != 2 or pair[0] > pair[1]:
                raise ValueError(f"{name} must be an ascending (min, max) pair")
        if self.image_side < 16:
            raise ValueError("image_side must be at least 16")
        if self.sweep_step <= 0:
            raise ValueError("sweep_step must be positive")
        if min(self.n_originals, self.train_per_source, self.sweep_per_source) < 1 or self.test_per_source < 0:
            raise ValueError("sample counts must be positive")
        if self.n_scales < 2 or self.grid_length < 16:
            raise ValueError("n_scales must be >= 2 and grid_length >= 16")
        BbnConfig(**{k: tuple(v) for k, v in self.bbn.items()})

    # -- (de)serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return json.loads(json.dumps(dataclasses.asdict(self)))

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {unknown}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise ValueError(f"{path}: config must be a JSON object")
        return cls.from_dict(d)

    def override(self, **changes) -> "RunConfig":
        d = self.to_dict()
        d.update({k: v for k, v in changes.items() if v is not None})
        return RunConfig.from_dict(d)

    @property
    def run_id(self) -> str:
        d = self.to_dict()
        d.pop("out")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def dataset_config(self) -> DatasetConfig:
        return DatasetConfig(
            scenario=self.scenario,
            train_per_source=self.train_per_source,
            test_per_source=self.test_per_source,
            train_snr=self.train_snr,
            test_snr=self.test_snr,
            integer_snr=self.integer_snr,
            grid_length=self.grid_length,
            bbn=BbnConfig(**{k: tuple(v) for k, v in self.bbn.items()}),
            seed=self.seed,
        )


def write_resolved(cfg: RunConfig, directory, command: str) -> Path:
    path = Path(directory) / "resolved_config.json"
    doc = {"command": command, "run_id": cfg.run_id, "config": cfg.to_dict()}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


@contextlib.contextmanager
def staged_dir(target):
    """Build a directory under a temporary name and swap it in on success;
    on failure the partial directory is removed."""
    target = Path(target)
    tmp = target.with_name(target.name + ".partial")
    shutil.rmtree(tmp, ignore_errors=True)
    tmp.mkdir(parents=True)
    try:
        yield tmp
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    shutil.rmtree(target, ignore_errors=True)
    os.replace(tmp, target)


def _atomic_save_model(model, path):
    path = Path(path)
    tmp = path.with_name(path.name + ".partial")
    save_model(model, tmp)
    os.replace(tmp, path)


def _require(path, what):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path}: {what} not found; run the earlier pipeline stage first")
    return path


# -- stages ------------------------------------------------------------------


def cmd_import(files, out) -> Path:
    """Parse RRUFF files into ``<out>/manifest.json``; class labels come from
    the ``##NAMES=`` header."""
    if not files:
        raise EmptyInput("no input files")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for f in files:
        s = read_rruff(f)
        if not s.label:
            raise DataError(f"{f}: no ##NAMES= header to take the class label from")
        stem = Path(f).stem
        entries.append(ManifestEntry(stem, os.path.relpath(Path(f).resolve(), out.resolve()), s.label))
    ids = [e.id for e in entries]
    if len(set(ids)) != len(ids):
        raise DataError("input file names must have distinct stems")
    labels = tuple(sorted({e.label for e in entries}))
    manifest = DatasetManifest(entries, labels)
    save_manifest(manifest, out / "manifest.json")
    return out / "manifest.json"


def source_manifest(cfg: RunConfig):
    """``(manifest, base_dir)`` of the clean originals."""
    if cfg.manifest is None:
        return demo_manifest(cfg.n_originals), Path(".")
    path = _require(cfg.manifest, "manifest")
    return load_manifest(path), path.parent


def cmd_synth(cfg: RunConfig) -> Path:
    """Noisy train/test dataset in ``<out>/dataset``. The clean originals are
    copied into ``sources/`` so later stages are self-contained."""
    manifest, base = source_manifest(cfg)
    target = Path(cfg.out) / "dataset"
    with staged_dir(target) as d:
        (d / "sources").mkdir()
        copied = []
        for e in manifest.entries:
            rel = f"sources/{e.id}.txt"
            write_rruff(load_source(e, base), d / rel)
            copied.append(dataclasses.replace(e, source=rel))
        local = DatasetManifest(copied, manifest.class_names)
        save_manifest(local, d / "sources.json")
        ds = build_dataset(local, cfg.dataset_config(), d)
        save_dataset(ds, d)
        write_resolved(cfg, d, "synth")
    log.info("synth: %d samples -> %s", len(ds.samples), target)
    return target


def transform_spectra(spectra, cfg: RunConfig) -> np.ndarray:
    """(N, side, side, 3) uint8 scalogram images."""
    scales = default_scales(cfg.grid_length, cfg.n_scales)
    return np.stack([render(cwt(s, scales), cfg.image_side).pixels for s in spectra])


def cmd_transform(cfg: RunConfig) -> Path:
    ds = load_dataset(_require(Path(cfg.out) / "dataset", "dataset"))
    entries = ds.manifest.entries
    pixels = transform_spectra([s.noisy for s in ds.samples], cfg)
    target = Path(cfg.out) / "images"
    with staged_dir(target) as d:
        for e, p in zip(entries, pixels):
            save_png(ScalogramImage(p, e.id), d / f"{e.id}.png")
        np.savez(
            d / "images.npz",
            pixels=pixels,
            labels=ds.labels(),
            split=np.array([e.split for e in entries]),
            ids=np.array([e.id for e in entries]),
            snr_db=np.array([np.nan if e.snr_db is None else e.snr_db for e in entries]),
            class_names=np.array(ds.class_names),
        )
        write_resolved(cfg, d, "transform")
    return target


def load_images(out) -> dict:
    with np.load(_require(Path(out) / "images" / "images.npz", "image store"), allow_pickle=False) as z:
        return {k: z[k] for k in z.files}


def predictor(model):
    """``images -> labels`` callable for any model kind."""
    if getattr(model, "input_kind", "features") == "images":
        return model.predict
    return lambda images: model.predict(feature_matrix(images))


def fit_model(kind, images, labels, n_classes, cfg: RunConfig, progress=None):
    hp = dict(cfg.classifiers[kind])
    if kind == "dcnn":
        from .dcnn import DcnnConfig, train

        dcfg = DcnnConfig(n_classes=n_classes, input_side=images.shape[1], **{"seed": cfg.seed, **hp})
        model, history = train(images, labels, dcfg, progress=progress)
        return model, history
    if kind == "rf":
        hp.setdefault("seed", cfg.seed)
    return make_classifier(kind, **hp).fit(feature_matrix(images), labels, n_classes), None


def cmd_train(cfg: RunConfig) -> Path:
    store = load_images(cfg.out)
    train = store["split"] == "train"
    if not train.any():
        raise DataError("image store has no training samples")
    n_classes = len(store["class_names"])
    models = Path(cfg.out) / "models"
    models.mkdir(parents=True, exist_ok=True)
    kind = cfg.classifier
    model, history = fit_model(kind, store["pixels"][train], store["labels"][train], n_classes, cfg)
    path = models / f"{kind}.npz"
    _atomic_save_model(model, path)
    if history is not None:
        from .dcnn import write_history

        write_history(history, models / f"{kind}_history.csv")
    write_resolved(cfg, models, f"train {kind}")
    return path


def report_stem(cfg: RunConfig, command: str, kind: str, scenario: str) -> str:
    return f"{command}_{kind}_{scenario.lower()}_{cfg.run_id}"


def cmd_eval(cfg: RunConfig) -> list:
    store = load_images(cfg.out)
    test = store["split"] == "test"
    if not test.any():
        raise EmptyInput("image store has no test samples")
    kind = cfg.classifier
    model = load_model(_require(Path(cfg.out) / "models" / f"{kind}.npz", f"{kind} model"))
    pred = predictor(model)(store["pixels"][test])
    names = tuple(str(c) for c in store["class_names"])
    report = evaluate(store["labels"][test], pred, len(names), names)
    reports = Path(cfg.out) / "reports"
    reports.mkdir(parents=True, exist_ok=True)
    files = emit_report(report, reports, report_stem(cfg, "eval", kind, cfg.scenario))
    write_resolved(cfg, reports, f"eval {kind}")
    log.info("eval %s: accuracy %.4f", kind, report.accuracy)
    return files


def sweep_points(cfg: RunConfig) -> list:
    lo, hi = cfg.sweep_snr
    pts = np.arange(lo, hi + cfg.sweep_step / 2, cfg.sweep_step)
    return [float(p) for p in pts if p <= hi + 1e-9]


def sweep_generator(sources: DatasetManifest, base_dir, cfg: RunConfig):
    """``generate(snr_db) -> (images, labels)`` with a seed fixed per point."""

    def generate(snr):
        point_seed = int(np.random.SeedSequence([cfg.seed, 7919, int(round(snr * 1000)) + 10**6]).generate_state(1)[0])
        dcfg = dataclasses.replace(
            cfg.dataset_config(),
            scenario=cfg.sweep_scenario,
            train_per_source=0,
            test_per_source=cfg.sweep_per_source,
            test_snr=(snr, snr),
            seed=point_seed,
        )
        ds = build_dataset(sources, dcfg, base_dir)
        return transform_spectra([s.noisy for s in ds.samples], cfg), ds.labels()

    return generate


def cmd_sweep(cfg: RunConfig, kinds=None) -> list:
    """Accuracy against SNR for every trained model (or ``kinds``)."""
    dataset = _require(Path(cfg.out) / "dataset", "dataset")
    sources = load_manifest(_require(dataset / "sources.json", "source manifest"))
    model_dir = Path(cfg.out) / "models"
    kinds = [k for k in KINDS if (model_dir / f"{k}.npz").exists()] if kinds is None else list(kinds)
    if not kinds:
        raise EmptyInput(f"no trained models in {model_dir}")
    models = {k: predictor(load_model(_require(model_dir / f"{k}.npz", f"{k} model"))) for k in kinds}
    points = sweep_points(cfg)
    if len(points) < 2:
        raise ValueError("sweep range must hold at least two points")
    curves = snr_sweep(models, sweep_generator(sources, dataset, cfg), points, cfg.sweep_scenario)
    reports = Path(cfg.out) / "reports"
    reports.mkdir(parents=True, exist_ok=True)
    files = emit_report(curves, reports, report_stem(cfg, "sweep", "all", cfg.sweep_scenario))
    write_resolved(cfg, reports, "sweep")
    return files

