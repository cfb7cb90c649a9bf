"""Command-line interface: run a scenario, sweep a parameter, or self-check.

Exit codes: 0 success, 1 invariant failure, 2 config error, 3 capacity error.
"""

from __future__ import annotations

import argparse
import sys

from .checks import run_checks
from .config import SWEEP_PARAMS, SweepSpec, load_config
from .errors import CapacityError, ConfigError, QspinError
from .runner import run_scenario, run_sweep

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_CONFIG = 2
EXIT_CAPACITY = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qspin",
        description=(
            "Exact-diagonalization entropy-balance runs for partitioned spin systems"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and write CSV output")
    p_run.add_argument("--config", required=True, help="scenario config file (YAML)")
    p_run.add_argument("--out", required=True, help="output directory")

    p_sweep = sub.add_parser("sweep", help="run a scenario family over one parameter")
    p_sweep.add_argument("--config", required=True, help="base scenario config (YAML)")
    p_sweep.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p_sweep.add_argument(
        "--values", required=True, help="comma-separated list of sweep values"
    )
    p_sweep.add_argument("--out", required=True, help="output directory")

    p_check = sub.add_parser("check", help="run the built-in invariant suite")
    p_check.add_argument("--level", choices=("fast", "full"), default="fast")

    return parser


def _parse_values(param: str, text: str) -> list:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise ConfigError("--values must name at least one value")
    caster = int if param in ("reservoir_size", "boundary_offset") else float
    try:
        return [caster(s) for s in items]
    except ValueError as exc:
        raise ConfigError(f"--values: {exc}") from exc


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = load_config(args.config)
            result = run_scenario(config, args.out)
            print(f"wrote {result.timeseries_path} and {result.summary_path}")
            return EXIT_OK
        if args.command == "sweep":
            config = load_config(args.config)
            values = _parse_values(args.param, args.values)
            path = run_sweep(SweepSpec(args.param, values, config), args.out)
            print(f"wrote {path}")
            return EXIT_OK
        if args.command == "check":
            return EXIT_INVARIANT if run_checks(args.level) else EXIT_OK
        raise AssertionError(f"unhandled command {args.command}")
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QspinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
