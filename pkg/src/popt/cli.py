"""Command-line entry point: ``popt run | validate | bench-election``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from . import __version__
from . import election as el
from .config import ConfigError, load_config, validate_config
from .experiments import EXPERIMENTS, ExperimentSpec, run_experiment

LOG_ENV = "POPT_LOG_LEVEL"


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="popt", description=__doc__)
    ap.add_argument("--version", action="version", version=f"popt {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a registered experiment")
    r.add_argument("experiment", choices=sorted(EXPERIMENTS))
    r.add_argument("--config", help="YAML config (defaults used when omitted)")
    r.add_argument("--seed", type=_u64, default=None)
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--no-plots", action="store_true", help="skip figure rendering")

    v = sub.add_parser("validate", help="check a config file")
    v.add_argument("--config", required=True)

    b = sub.add_parser("bench-election", help="time one election solve")
    b.add_argument("--na", type=int, required=True, help="number of applicants")
    b.add_argument("--seed", type=_u64, default=0)
    b.add_argument("--config", default=None)
    return ap


def cmd_run(args) -> int:
    cfg = load_config(args.config, args.seed)
    spec = ExperimentSpec(args.experiment, args.out, cfg, plots=not args.no_plots)
    summary = run_experiment(spec)
    print(json.dumps(summary, indent=2, sort_keys=True, default=float))
    return 0


def cmd_validate(args) -> int:
    cfg, errors = validate_config(args.config)
    if errors:
        for e in errors:
            print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"{args.config}: ok")
    return 0


def cmd_bench(args) -> int:
    if args.na < 1:
        print("error: --na must be >= 1", file=sys.stderr)
        return 2
    cfg = load_config(args.config, args.seed)
    rng = np.random.default_rng(args.seed)
    apps = el.ApplicantSet([f"N{i:03d}" for i in range(args.na)], rng.random(args.na))
    t0 = time.perf_counter()
    out = el.solve_p1(apps, cfg.weights, cfg.gwo)
    dt = time.perf_counter() - t0
    print(json.dumps({"na": args.na, "seconds": dt, "O": out.comprehensive, "F": out.fairness,
                      "D": out.decentralization, "C": out.credibility}, indent=2))
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get(LOG_ENV, "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return {"run": cmd_run, "validate": cmd_validate, "bench-election": cmd_bench}[args.command](args)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
