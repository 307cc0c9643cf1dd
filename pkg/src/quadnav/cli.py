"""Command-line entry point for the dynamic path-planning benchmark."""

from __future__ import annotations

import argparse
import sys

from .environment import Difficulty
from .experiments import ALL_APPROACHES, Approach, ExperimentConfig, run_full_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadnav",
        description="Benchmark hierarchical Q-learning path planners against "
                    "A* baselines on seeded dynamic grid mazes.",
    )
    parser.add_argument("--sizes", default="20,50,100,200,300",
                        help="comma-separated square grid sizes")
    parser.add_argument("--difficulties", default="easy,medium,hard",
                        help="comma-separated difficulty names")
    parser.add_argument("--approaches",
                        default=",".join(a.value for a in ALL_APPROACHES),
                        help="comma-separated approaches: "
                             + ", ".join(a.value for a in ALL_APPROACHES))
    parser.add_argument("--seed", type=int, default=7, help="master seed")
    parser.add_argument("--edge-case", action="store_true",
                        help="run the station-free-quadrant 50x50 hard environment "
                             "(overrides --sizes/--difficulties)")
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--dump-policy", action="store_true",
                        help="write per-time-step policy text grids")
    return parser


def parse_config(argv: list[str] | None = None) -> ExperimentConfig:
    args = build_parser().parse_args(argv)
    sizes = tuple(int(tok) for tok in args.sizes.split(",") if tok.strip())
    if not sizes or any(size < 1 for size in sizes):
        raise ValueError(f"invalid sizes {args.sizes!r}")
    difficulties = tuple(Difficulty.from_name(tok)
                         for tok in args.difficulties.split(",") if tok.strip())
    approaches = tuple(Approach.from_name(tok)
                       for tok in args.approaches.split(",") if tok.strip())
    if not difficulties or not approaches:
        raise ValueError("need at least one difficulty and one approach")
    return ExperimentConfig(
        sizes=sizes,
        difficulties=difficulties,
        approaches=approaches,
        master_seed=args.seed,
        edge_case=args.edge_case,
        output_dir=args.out,
        policy_dump=args.dump_policy,
    )


def main(argv: list[str] | None = None) -> int:
    try:
        config = parse_config(argv)
        run_full_experiment(config)
    except Exception as exc:  # argparse handles --help/-h before this
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
