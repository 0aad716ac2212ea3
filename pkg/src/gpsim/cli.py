"""Command line entry point.

Usage: ``gpsim <experiment> --config <path> [--seed N] [--out DIR]`` with
experiments simulate, ode, portrait, equilibria, adiabatic, converge-eps,
converge-dt. Exit codes: 0 success, 1 usage/config error, 2 a monitored
a-priori bound failed during the run.
"""

from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, load_config
from .errors import BoundViolation, ConfigError, GpsimError
from .experiments import DRIVERS


class _Parser(argparse.ArgumentParser):
    # Usage problems must exit 1; argparse defaults to 2, which is reserved
    # for bound violations.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gpsim",
                     description="Condensate/reservoir simulations on the 1D torus")
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", required=True, help="INI config file")
        sp.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
        sp.add_argument("--out", default=None, help="override the output directory")
    return parser


def run_cli(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        cfg = load_config(args.config, args.experiment, seed=args.seed, out_dir=args.out)
    except ConfigError as exc:
        print(f"ConfigError: {exc}", file=sys.stderr)
        return 1
    try:
        DRIVERS[cfg.experiment](cfg)
    except BoundViolation as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except GpsimError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))
