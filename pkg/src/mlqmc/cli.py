"""Command-line entry point for estimator sweeps.

Usage: mlqmc-experiment --config exp.ini [--seed N] [--out results.csv]
                        [--scale desk|paper] [--timing]

Exit status 0 when every (L, estimator) cell succeeded, 1 when any row
recorded an error, 2 on configuration problems.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigurationError, ParseError
from .experiment import (SCALES, parse_config, run_experiment, with_overrides,
                         write_csv)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlqmc-experiment",
        description="Run MC/QMC/MLMC/MLQMC sweeps from a config file.")
    parser.add_argument("--config", required=True, help="path to the INI config")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config's RNG seed")
    parser.add_argument("--out", default=None,
                        help="override the config's output CSV path")
    parser.add_argument("--scale", choices=sorted(SCALES), default="desk",
                        help="calibration preset for keys the config omits")
    parser.add_argument("--timing", action="store_true",
                        help="fill the wall-clock column (breaks byte-identical "
                             "reruns)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = parse_config(args.config, scale=args.scale)
        config = with_overrides(config, seed=args.seed, out=args.out)
        rows = run_experiment(config)
        write_csv(rows, config.output, timing=args.timing)
    except (ParseError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    failures = [row for row in rows if row.error]
    for row in failures:
        print(f"row ({row.estimator}, L={row.L}) failed: {row.error}",
              file=sys.stderr)
    print(f"wrote {len(rows)} rows to {config.output}"
          + (f" ({len(failures)} errored)" if failures else ""))
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
