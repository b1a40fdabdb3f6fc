"""Command-line entry point: ``plot --out <file> <csv>...``."""

from __future__ import annotations

import argparse
import sys

from .errors import PlotError
from .plotting import PlotSpec, plot_trajectories


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Overlay swing-angle trajectories from simulation CSVs.",
    )
    parser.add_argument("csvs", nargs="+", metavar="csv", help="trajectory CSV files")
    parser.add_argument("--out", required=True, help="output SVG path")
    parser.add_argument(
        "--label", action="append", dest="labels",
        help="legend label, once per CSV (default: sidecar metadata)",
    )
    parser.add_argument(
        "--probe-time", action="append", type=float, default=None,
        dest="probe_times", help="draw a vertical marker at this time",
    )
    parser.add_argument("--title", default="Evolution of the swing angle")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = PlotSpec(
            csv_paths=args.csvs,
            output=args.out,
            labels=args.labels,
            probe_times=args.probe_times or [],
            title=args.title,
        )
        plot_trajectories(spec)
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
