"""Accuracy against SNR, end to end through the command line.

Usage: python3 demos/03_robustness_sweep.py [out_dir]

Drives the ``ramanwt`` CLI exactly as a user would: synth, transform, train
each model, then sweep 0-30 dB of pure Gaussian noise. Every sweep point
draws one fresh test set that all models share. Prints the 90% threshold
SNR per model from the written sweep CSV.
"""

import json
import sys
from pathlib import Path

from ramanwt.cli import main
from ramanwt.evaluation import read_sweep_csv, threshold_snr

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out/03")
out.mkdir(parents=True, exist_ok=True)
config = out / "config.json"
config.write_text(json.dumps({
    "n_originals": 6,
    "train_per_source": 10,
    "test_per_source": 4,
    "sweep_per_source": 4,
    "sweep_snr": [0, 30],
    "sweep_step": 5,
    "classifiers": {"rf": {"n_trees": 50}, "dcnn": {"epochs": 12}},
}, indent=2))


def cli(*argv):
    code = main([*argv, "--config", str(config), "--out", str(out / "run")])
    if code:
        sys.exit(f"ramanwt {argv[0]} failed with exit code {code}")


cli("synth")
cli("transform")
for kind in ("nb", "knn", "rf", "svm", "dcnn"):
    cli("train", "--classifier", kind)
cli("sweep")

csv_path = next((out / "run" / "reports").glob("sweep_all_gn_*_sweep.csv"))
print(f"\n{'model':6} " + " ".join(f"{p.snr_db:>5.0f}" for p in read_sweep_csv(csv_path)[0].points) + "   90% at")
for curve in read_sweep_csv(csv_path):
    t = threshold_snr(curve, 0.9)
    print(f"{curve.classifier_kind:6} " + " ".join(f"{a:5.2f}" for a in curve.accuracy)
          + ("   never" if t is None else f"   {t:4.1f} dB"))
