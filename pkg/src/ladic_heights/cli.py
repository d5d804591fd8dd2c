"""Command line interface.

Subcommands run the pipeline up to a stage and emit the deterministic JSON
report: `clusters`, `skeleton`, `action`, `heights` (full pipeline), `check`
(full pipeline plus the invariant suite).

Exit codes: 0 success, 2 validation error, 3 certification failure,
4 wild ramification unsupported.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import (
    CertificationFailed,
    PrecisionError,
    ValidationError,
    WildRamification,
)
from .pipeline import report_to_json, run


def _add_common(p):
    p.add_argument("--input", required=True, help="job file (JSON)")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.add_argument("--precision", type=int, help="starting working precision (digits)")
    p.add_argument("--max-precision", type=int, help="precision cap for retries")
    p.add_argument("--ascii", action="store_true", help="print the cluster picture")
    p.add_argument("--jobs", type=int, default=1, help="accepted for compatibility; runs sequentially")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ladic-heights")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("clusters", "skeleton", "action", "heights", "check"):
        _add_common(sub.add_parser(name))
    args = parser.parse_args(argv)

    try:
        with open(args.input) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read job: {exc}", file=sys.stderr)
        return 2

    if args.precision is not None:
        raw["precision"] = args.precision
    if args.max_precision is not None:
        raw["max_precision"] = args.max_precision

    try:
        report = run(raw, stage=args.command)
    except WildRamification as exc:
        print(f"wild ramification unsupported: {exc}", file=sys.stderr)
        return 4
    except CertificationFailed as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return 3
    except PrecisionError as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2

    if args.ascii:
        print(report["cluster_picture"]["ascii"])
    text = report_to_json(report)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
