"""Train the four classical models and the CNN on one small scalogram set.

Usage: python3 demos/02_classifiers_side_by_side.py [out_dir]

Builds a five-class dataset from the bundled profiles (train at 30-80 dB,
test at 1-30 dB, baseline plus Gaussian noise), renders 64x64 scalograms,
fits every model and writes a metrics/confusion report per model. Takes a
couple of minutes, most of it in the CNN.
"""

import sys
import time
from pathlib import Path

import numpy as np

from ramanwt import emit_report, evaluate
from ramanwt.pipeline import KINDS, RunConfig, cmd_synth, cmd_transform, fit_model, load_images, predictor

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out/02")
cfg = RunConfig(
    out=str(out),
    seed=3,
    n_originals=6,
    train_per_source=12,
    test_per_source=6,
    classifiers={"dcnn": {"epochs": 15}},
)

cmd_synth(cfg)
cmd_transform(cfg)
store = load_images(cfg.out)
names = [str(c) for c in store["class_names"]]
train, test = store["split"] == "train", store["split"] == "test"
print(f"{train.sum()} training and {test.sum()} test scalograms, classes: {', '.join(names)}\n")

snr = store["snr_db"][test]
print(f"{'model':6} {'acc':>6} {'1-10dB':>7} {'11-20':>6} {'21-30':>6} {'fit s':>6}")
for kind in KINDS:
    t0 = time.perf_counter()
    model, _ = fit_model(kind, store["pixels"][train], store["labels"][train], len(names), cfg)
    fit_s = time.perf_counter() - t0
    pred = predictor(model)(store["pixels"][test])
    report = evaluate(store["labels"][test], pred, len(names), names)
    ok = pred == store["labels"][test]
    bins = [np.mean(ok[(snr > lo) & (snr <= lo + 10)]) for lo in (0, 10, 20)]
    print(f"{kind:6} {report.accuracy:6.3f} {bins[0]:7.3f} {bins[1]:6.3f} {bins[2]:6.3f} {fit_s:6.1f}")
    emit_report(report, out / "reports", f"demo_{kind}")

print(f"\nper-model metrics, confusion CSVs and heatmaps in {out}/reports/")
