"""``ramanwt`` command line.

Exit codes: 0 success, 1 usage error, 2 data error, 3 training divergence.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import pipeline
from .errors import DataError, Diverged
from .pipeline import KINDS, RunConfig

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for data errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common(p):
    p.add_argument("--config", help="JSON run configuration; flags override its values")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="run directory (default: 'run')")
    p.add_argument("--scenario", type=str.lower, choices=["gn", "bb", "gb", "clean"])
    p.add_argument("--snr-min", type=float)
    p.add_argument("--snr-max", type=float)
    p.add_argument("--classifier", choices=KINDS)
    p.add_argument("--image-side", type=int)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ramanwt", description="Raman spectra -> wavelet scalograms -> classifiers.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)
    p = sub.add_parser("import", help="parse RRUFF files into a dataset manifest")
    p.add_argument("files", nargs="+")
    _common(p)
    p = sub.add_parser("synth", help="build noisy train/test datasets")
    p.add_argument("--manifest", help="source manifest from 'import' (default: bundled synthetic classes)")
    _common(p)
    for name, text in (
        ("transform", "render scalogram images of the dataset"),
        ("train", "train one classifier on the image store"),
        ("eval", "evaluate a trained classifier on the test split"),
        ("sweep", "accuracy against SNR for every trained classifier"),
    ):
        _common(sub.add_parser(name, help=text))
    return parser


def resolve_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    changes = {"seed": args.seed, "out": args.out, "classifier": args.classifier, "image_side": args.image_side}
    if getattr(args, "manifest", None):
        changes["manifest"] = args.manifest
    scenario = args.scenario.upper() if args.scenario else None
    # scenario and SNR range apply to the sweep for 'sweep', to the test split otherwise
    if args.command == "sweep":
        changes["sweep_scenario"] = scenario
        snr_key, current = "sweep_snr", cfg.sweep_snr
    else:
        changes["scenario"] = scenario
        snr_key, current = "test_snr", cfg.test_snr
    if args.snr_min is not None or args.snr_max is not None:
        lo = current[0] if args.snr_min is None else args.snr_min
        hi = current[1] if args.snr_max is None else args.snr_max
        changes[snr_key] = (lo, hi)
    return cfg.override(**changes)


def run(args) -> None:
    cfg = resolve_config(args)
    if args.command == "import":
        path = pipeline.cmd_import(args.files, cfg.out)
    elif args.command == "synth":
        path = pipeline.cmd_synth(cfg)
    elif args.command == "transform":
        path = pipeline.cmd_transform(cfg)
    elif args.command == "train":
        path = pipeline.cmd_train(cfg)
    elif args.command == "eval":
        path = pipeline.cmd_eval(cfg)
    else:
        path = pipeline.cmd_sweep(cfg)
    for p in path if isinstance(path, list) else [path]:
        print(p)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"ramanwt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        run(args)
    except Diverged as exc:
        print(f"ramanwt: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (DataError, OSError) as exc:
        print(f"ramanwt: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, TypeError) as exc:
        print(f"ramanwt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
