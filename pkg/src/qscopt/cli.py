"""Command line harness: `qscopt run <config>` and `qscopt plot <csv>`.

Exit codes: 0 success, 1 config/input error, 2 capacity error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .errors import CapacityError, ConfigError, InvariantError
from .statevector import RNG_ALGORITHM


def _version_string() -> str:
    return f"qscopt {__version__} (rng {RNG_ALGORITHM}, numpy {np.__version__})"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qscopt",
        description="Seeded quantum sensor circuit experiments with CSV/SVG output.")
    parser.add_argument("--version", action="version", version=_version_string())
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment config file")
    run_p.add_argument("config", help="path to a key = value experiment file")
    run_p.add_argument("--out-dir", default=None,
                       help="output directory (default: $QSCOPT_OUT_DIR or .)")
    run_p.add_argument("--seed-override", type=int, default=None,
                       help="replace the config seed")

    plot_p = sub.add_parser("plot", help="render a trace CSV as an SVG chart")
    plot_p.add_argument("csv", help="path to a trace CSV")
    plot_p.add_argument("--out", required=True, help="output SVG path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            from .experiments import parse_config, run
            try:
                with open(args.config, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
            config = parse_config(text)
            out_dir = args.out_dir or os.environ.get("QSCOPT_OUT_DIR", ".")
            record = run(config, out_dir=out_dir, seed_override=args.seed_override)
            print(f"{config.kind}: wrote {os.path.join(out_dir, config.csv_path())} "
                  f"(hash {record.content_hash[:12]})")
        else:
            from .plotting import emit_plot
            emit_plot(args.csv, args.out)
            print(f"wrote {args.out}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
