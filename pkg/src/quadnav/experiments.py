"""Full simulation protocol: seeded environments per size and difficulty,
initial training, a replayed change timeline shared by all approaches, five
metrics per time step, and the two CSV result files."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .environment import (
    CellType,
    Difficulty,
    GridEnvironment,
    apply_changes,
    generate,
    generate_edge_case,
    make_rng,
    sample_change_count,
)
from .hierarchy import (
    TreeNode,
    decompose,
    evaluate_policy,
    extract_policy,
    leaves_for_changes,
    policy_text,
)
from .planning_astar import PathTable, path_is_valid, plan_all
from .strategy import StrategyConfig, TrainingMode, only_train_leaf_nodes, smart_hierarchy


class Approach(Enum):
    ASTAR_STATIC = "astar-static"
    ASTAR_ORACLE = "astar-oracle"
    LEAF_ONLY = "leaf-only"
    SINGLE_AGENT = "single-agent"
    FED_EQ_AVG = "fed-eqavg"
    FED_IM_AVG = "fed-imavg"

    @property
    def is_learning(self) -> bool:
        return self not in (Approach.ASTAR_STATIC, Approach.ASTAR_ORACLE)

    @property
    def training_mode(self) -> TrainingMode | None:
        return {
            Approach.SINGLE_AGENT: TrainingMode.SINGLE_AGENT,
            Approach.FED_EQ_AVG: TrainingMode.FED_EQ_AVG,
            Approach.FED_IM_AVG: TrainingMode.FED_IM_AVG,
        }.get(self)

    @classmethod
    def from_name(cls, name: str) -> "Approach":
        for approach in cls:
            if approach.value == name.strip():
                return approach
        raise ValueError(f"unknown approach {name!r}")


ALL_APPROACHES = tuple(Approach)


@dataclass
class ExperimentConfig:
    sizes: tuple[int, ...] = (20, 50, 100, 200, 300)
    difficulties: tuple[Difficulty, ...] = tuple(Difficulty)
    approaches: tuple[Approach, ...] = ALL_APPROACHES
    master_seed: int = 7
    seed_offset: int = 50
    edge_case: bool = False
    output_dir: str | Path = "results"
    policy_dump: bool = False
    n_jobs: int | None = None


@dataclass
class MetricsRecord:
    approach: str
    size: int
    difficulty: str
    time_step: int
    success_rate: float
    adaptation_seconds: float
    cumulative_adaptation_seconds: float
    mean_path_length: float | None
    initial_training_seconds: float | None
    num_changes: int


def _simulate_timeline(env0: GridEnvironment, seed: int,
                       steps: int) -> tuple[list[GridEnvironment], list[list]]:
    """Pre-roll the change sequence once so every approach replays the same
    snapshots and events."""
    rng = make_rng(seed)
    snapshots = [env0]
    step_events: list[list] = [[]]
    env = env0
    for _ in range(steps):
        n = sample_change_count(rng)
        env, events = apply_changes(env, rng, n)
        snapshots.append(env)
        step_events.append(events)
    return snapshots, step_events


def evaluate_learned(root: TreeNode, env: GridEnvironment) -> tuple[float, float | None]:
    """Whole-grid success rate and mean successful-path length under the
    consolidated root policy."""
    return evaluate_policy(root.qtable, env, root.region)


def evaluate_astar(table: PathTable, env: GridEnvironment) -> tuple[float, float | None]:
    """Success rate and mean length of the table's still-valid paths."""
    eligible = 0
    lengths: list[int] = []
    for r in range(env.rows):
        for c in range(env.cols):
            if env.cells[r, c] == CellType.OBSTACLE:
                continue
            eligible += 1
            path = table.get((r, c))
            if path is not None and path_is_valid(path, env):
                lengths.append(len(path) - 1)
    rate = 1.0 if eligible == 0 else len(lengths) / eligible
    mean_length = sum(lengths) / len(lengths) if lengths else None
    return rate, mean_length


def _dump_policy(root: TreeNode, env: GridEnvironment, approach: Approach,
                 time_step: int, out_dir: Path) -> None:
    policy = extract_policy(root, root.region)
    path = out_dir / f"policy_{approach.value}_{time_step}.txt"
    path.write_text(policy_text(policy, env), encoding="utf-8")


def _run_approach(cfg: ExperimentConfig, approach: Approach, size: int,
                  difficulty: Difficulty, seed: int,
                  snapshots: list[GridEnvironment],
                  step_events: list[list], out_dir: Path) -> list[MetricsRecord]:
    env0 = snapshots[0]
    diff_name = difficulty.name.lower()
    records: list[MetricsRecord] = []
    root: TreeNode | None = None
    table: PathTable | None = None
    strategy_cfg: StrategyConfig | None = None
    train_rng = None

    start = time.perf_counter()
    if approach.is_learning:
        root = decompose(env0.rows, env0.cols)
        mode = approach.training_mode or TrainingMode.SINGLE_AGENT
        strategy_cfg = StrategyConfig(mode=mode, n_jobs=cfg.n_jobs)
        train_rng = make_rng([seed, list(Approach).index(approach)])
        if approach is Approach.LEAF_ONLY:
            only_train_leaf_nodes(root, [], env0, strategy_cfg, train_rng)
        else:
            smart_hierarchy(root, [], env0, strategy_cfg, train_rng)
    else:
        table = plan_all(env0)
    initial_seconds = time.perf_counter() - start

    if approach.is_learning:
        rate, mean_len = evaluate_learned(root, env0)
    else:
        rate, mean_len = evaluate_astar(table, env0)
    records.append(MetricsRecord(approach.value, size, diff_name, 0, rate,
                                 0.0, 0.0, mean_len, initial_seconds, 0))
    if cfg.policy_dump and approach.is_learning:
        _dump_policy(root, env0, approach, 0, out_dir)

    cumulative = 0.0
    for t in range(1, len(snapshots)):
        env_t = snapshots[t]
        events = step_events[t]
        if approach is Approach.ASTAR_STATIC:
            adaptation = 0.0
        elif approach is Approach.ASTAR_ORACLE:
            start = time.perf_counter()
            table = plan_all(env_t)
            adaptation = time.perf_counter() - start
        else:
            start = time.perf_counter()
            changed = leaves_for_changes(root, events)
            if approach is Approach.LEAF_ONLY:
                only_train_leaf_nodes(root, changed, env_t, strategy_cfg, train_rng)
            else:
                smart_hierarchy(root, changed, env_t, strategy_cfg, train_rng)
            adaptation = time.perf_counter() - start
        if approach.is_learning:
            rate, mean_len = evaluate_learned(root, env_t)
        else:
            rate, mean_len = evaluate_astar(table, env_t)
        cumulative += adaptation
        records.append(MetricsRecord(approach.value, size, diff_name, t, rate,
                                     adaptation, cumulative, mean_len, None,
                                     len(events)))
        if cfg.policy_dump and approach.is_learning:
            _dump_policy(root, env_t, approach, t, out_dir)
    return records


def run_full_experiment(cfg: ExperimentConfig) -> list[MetricsRecord]:
    """Run every (size, difficulty, approach) cell and write both CSV files.
    Returns the detailed records."""
    out_dir = Path(cfg.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise RuntimeError(f"cannot create output directory {out_dir}: {exc}") from exc
    records: list[MetricsRecord] = []
    sizes = (50,) if cfg.edge_case else cfg.sizes
    difficulties = (Difficulty.HARD,) if cfg.edge_case else cfg.difficulties
    for size in sizes:
        for difficulty in difficulties:
            seed = cfg.master_seed + difficulty.index + cfg.seed_offset
            if cfg.edge_case:
                env0 = generate_edge_case(seed)
            else:
                env0 = generate(seed, size, size, difficulty)
            snapshots, step_events = _simulate_timeline(env0, seed, 2 * size)
            for approach in cfg.approaches:
                records.extend(_run_approach(cfg, approach, size, difficulty,
                                             seed, snapshots, step_events, out_dir))
    write_results(records, out_dir)
    return records


DETAILED_HEADER = (
    "approach", "size", "difficulty", "time_step", "success_rate",
    "adaptation_seconds", "cumulative_adaptation_seconds", "mean_path_length",
    "initial_training_seconds", "num_changes",
)
SUMMARY_HEADER = (
    "approach", "size", "difficulty", "mean_success_rate",
    "mean_adaptation_seconds", "total_cumulative_adaptation_seconds",
    "mean_path_length", "initial_training_seconds",
)


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.6f}"


def write_results(records: list[MetricsRecord], output_dir: str | Path) -> None:
    """Write results.csv (one aggregate row per approach/size/difficulty) and
    results_detailed.csv (one row per record); reals carry six decimals."""
    output_dir = Path(output_dir)
    detailed_path = output_dir / "results_detailed.csv"
    summary_path = output_dir / "results.csv"

    try:
        with open(detailed_path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(DETAILED_HEADER)
            for rec in records:
                writer.writerow((
                    rec.approach, rec.size, rec.difficulty, rec.time_step,
                    _fmt(rec.success_rate), _fmt(rec.adaptation_seconds),
                    _fmt(rec.cumulative_adaptation_seconds),
                    _fmt(rec.mean_path_length),
                    _fmt(rec.initial_training_seconds), rec.num_changes,
                ))
    except OSError as exc:
        raise RuntimeError(f"failed writing {detailed_path}: {exc}") from exc

    groups: dict[tuple, list[MetricsRecord]] = {}
    for rec in records:
        groups.setdefault((rec.approach, rec.size, rec.difficulty), []).append(rec)
    try:
        with open(summary_path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(SUMMARY_HEADER)
            for (approach, size, difficulty), group in groups.items():
                adaptation = [r.adaptation_seconds for r in group if r.time_step > 0]
                path_lengths = [r.mean_path_length for r in group if r.mean_path_length is not None]
                initial = next((r.initial_training_seconds for r in group
                                if r.initial_training_seconds is not None), None)
                writer.writerow((
                    approach, size, difficulty,
                    _fmt(sum(r.success_rate for r in group) / len(group)),
                    _fmt(sum(adaptation) / len(adaptation) if adaptation else 0.0),
                    _fmt(max(r.cumulative_adaptation_seconds for r in group)),
                    _fmt(sum(path_lengths) / len(path_lengths) if path_lengths else None),
                    _fmt(initial),
                ))
    except OSError as exc:
        raise RuntimeError(f"failed writing {summary_path}: {exc}") from exc
