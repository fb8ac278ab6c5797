"""Command line for torusmut-plots: one subcommand per figure kind.

Exit codes: 0 figure written, 2 usage or input-schema error.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .figures import FigureSpec, render
from .io import SchemaError

EXIT_OK = 0
EXIT_USAGE = 2


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--format", default="png", dest="fmt",
                        choices=("png", "svg", "pdf"))
    parser.add_argument("--title", default=None)
    parser.add_argument("--dpi", type=int, default=120)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torusmut-plots",
        description="Render figures from torusmut CSV/JSON output files.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "cdf-overlay",
        help="empirical CDF of a rescaled sample column vs a limit-law grid")
    p.add_argument("--samples", required=True,
                   help="per-replicate CSV (replicates.csv or samples.csv)")
    p.add_argument("--cdf", required=True, help="limit CDF grid CSV (t,F)")
    p.add_argument("--report", default=None,
                   help="validation report.json for scale and KS annotation")
    p.add_argument("--column", default=None,
                   help="sample column (default: highest sigma_k)")
    p.add_argument("--scale", type=float, default=None,
                   help="explicit rescale divisor (overrides report)")
    _add_common(p)

    p = sub.add_parser(
        "volume-ratio",
        help="mean-volume / approximation ratios from a validation report")
    p.add_argument("--report", required=True, help="validation report.json")
    _add_common(p)

    p = sub.add_parser(
        "event-map",
        help="snapshot of one replicate's accepted events")
    p.add_argument("--events", required=True, help="events.csv from simulate")
    p.add_argument("--meta", required=True, help="meta.json from simulate")
    p.add_argument("--replicate", type=int, default=None,
                   help="replicate_index to draw (default: first present)")
    _add_common(p)

    return parser


def _spec_from_args(args: argparse.Namespace) -> FigureSpec:
    kind = args.command.replace("-", "_")
    return FigureSpec(
        kind=kind,
        out=args.out,
        fmt=args.fmt,
        samples=getattr(args, "samples", None),
        cdf=getattr(args, "cdf", None),
        report=getattr(args, "report", None),
        events=getattr(args, "events", None),
        meta=getattr(args, "meta", None),
        column=getattr(args, "column", None),
        scale=getattr(args, "scale", None),
        replicate=getattr(args, "replicate", None),
        title=args.title,
        dpi=args.dpi,
    )


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = render(_spec_from_args(args))
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"{result.kind}: wrote {result.path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
