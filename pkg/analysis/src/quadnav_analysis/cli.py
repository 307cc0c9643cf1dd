"""Command-line wrapper: quadnav-plots <resultsDir> <plotsDir>."""

from __future__ import annotations

import argparse
import sys

from .plots import render_all


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="quadnav-plots",
        description="Render benchmark result CSVs into PNG comparison figures.",
    )
    parser.add_argument("results_dir", help="directory holding results.csv and results_detailed.csv")
    parser.add_argument("plots_dir", help="directory to write PNG images into")
    args = parser.parse_args(argv)
    try:
        count = render_all(args.results_dir, args.plots_dir)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {count} images to {args.plots_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
