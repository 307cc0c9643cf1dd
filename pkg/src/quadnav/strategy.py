"""Retraining decision and the two orchestration policies over the quadtree:
unconditional leaf-only retraining, and hierarchical escalation that walks
degraded regions up toward the root."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .environment import GridEnvironment, Rng, make_rng
from .hierarchy import (
    Region,
    TreeNode,
    compute_success_rate,
    propagate_down,
    propagate_up,
)
from .learning_fed import FedConfig, WeightScheme, train_fed
from .learning_single import LearnerConfig, train_single


class TrainingMode(Enum):
    SINGLE_AGENT = "single-agent"
    FED_EQ_AVG = "fed-eqavg"
    FED_IM_AVG = "fed-imavg"


@dataclass
class StrategyConfig:
    drop_threshold: float = 0.01
    min_success_rate: float = 0.9
    mode: TrainingMode = TrainingMode.SINGLE_AGENT
    single: LearnerConfig = field(default_factory=LearnerConfig)
    fed: FedConfig = field(default_factory=FedConfig)
    n_jobs: int | None = None  # None: one worker per CPU core


def retrain_decision(old_rate: float, new_rate: float, cfg: StrategyConfig) -> bool:
    """Retrain when untrained, when the rate dropped by more than the
    threshold, or when it sits below the acceptable minimum."""
    if not 0.0 <= new_rate <= 1.0:
        raise ValueError(f"success rate {new_rate} outside [0, 1]")
    if old_rate < 0:
        return True
    return old_rate - new_rate > cfg.drop_threshold or new_rate < cfg.min_success_rate


def train_detached(region: Region, q_values: np.ndarray, env: GridEnvironment,
                   mode: TrainingMode, cfg: StrategyConfig, seed: int) -> np.ndarray:
    """Train one region in isolation and return its new Q-values.

    Pure given its arguments, so it can run in a worker process.
    """
    node = TreeNode(region)
    node.qtable.values[:] = q_values
    rng = make_rng(seed)
    if mode is TrainingMode.SINGLE_AGENT:
        train_single(node, env, cfg.single, rng)
    elif mode is TrainingMode.FED_EQ_AVG:
        train_fed(node, env, cfg.fed, WeightScheme.EQ_AVG, rng)
    else:
        train_fed(node, env, cfg.fed, WeightScheme.IM_AVG, rng)
    return node.qtable.values


def _region_key(node: TreeNode):
    region = node.region
    return (region.start_row, region.start_col, region.end_row, region.end_col)


def _train_wave(nodes: list[TreeNode], root: TreeNode, env: GridEnvironment,
                cfg: StrategyConfig, mode: TrainingMode, rng: Rng) -> None:
    """Train the wave (in parallel when worthwhile), then propagate and
    refresh stored success rates behind the barrier.

    Per-node seeds are drawn in region order, so results do not depend on
    scheduling or worker count.
    """
    ordered = sorted(nodes, key=_region_key)
    seeds = [int(rng.integers(2**63)) for _ in ordered]
    jobs = cfg.n_jobs if cfg.n_jobs is not None else (os.cpu_count() or 1)
    if jobs <= 1 or len(ordered) == 1:
        results = [
            train_detached(node.region, node.qtable.values, env, mode, cfg, seed)
            for node, seed in zip(ordered, seeds)
        ]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(ordered))) as pool:
            results = list(pool.map(
                train_detached,
                [node.region for node in ordered],
                [node.qtable.values for node in ordered],
                [env] * len(ordered),
                [mode] * len(ordered),
                [cfg] * len(ordered),
                seeds,
            ))
    for node, values in zip(ordered, results):
        node.qtable.values[:] = values
        node.trained = True
    for node in ordered:
        propagate_up(node)
        propagate_down(node)
    for node in ordered:
        node.success_rate = compute_success_rate(node, root, env)


def only_train_leaf_nodes(root: TreeNode, changed_leaves, env: GridEnvironment,
                          cfg: StrategyConfig, rng: Rng) -> set[TreeNode]:
    """Retrain every changed leaf unconditionally with single-agent
    Q-learning; an empty change set means initial training of all leaves."""
    leaves = root.leaves() if not changed_leaves else list(changed_leaves)
    for leaf in leaves:
        if not leaf.is_leaf:
            raise ValueError(f"{leaf!r} is not a leaf")
    if not leaves:
        return set()
    _train_wave(leaves, root, env, cfg, TrainingMode.SINGLE_AGENT, rng)
    return set(leaves)


def smart_hierarchy(root: TreeNode, changed_leaves, env: GridEnvironment,
                    cfg: StrategyConfig, rng: Rng) -> set[TreeNode]:
    """Gate changed leaves on the retraining decision, train the flagged ones,
    and escalate to parents while post-training success stays below the
    minimum; the worst case retrains the root. Returns every node trained."""
    if not changed_leaves:
        wave = root.leaves()
    else:
        wave = []
        for leaf in sorted(changed_leaves, key=_region_key):
            if not leaf.is_leaf:
                raise ValueError(f"{leaf!r} is not a leaf")
            old_rate = leaf.success_rate
            if old_rate < 0:
                wave.append(leaf)
                continue
            new_rate = compute_success_rate(leaf, root, env)
            if retrain_decision(old_rate, new_rate, cfg):
                wave.append(leaf)
            elif new_rate > old_rate:
                leaf.success_rate = new_rate
    retrained: set[TreeNode] = set()
    while wave:
        _train_wave(wave, root, env, cfg, cfg.mode, rng)
        retrained.update(wave)
        parents = {
            node.parent for node in wave
            if node.parent is not None and node.success_rate < cfg.min_success_rate
        }
        next_wave = []
        for parent in sorted(parents, key=_region_key):
            if not parent.trained:
                next_wave.append(parent)
                continue
            old_rate = parent.success_rate
            new_rate = compute_success_rate(parent, root, env)
            if retrain_decision(old_rate, new_rate, cfg):
                next_wave.append(parent)
            elif new_rate > old_rate:
                parent.success_rate = new_rate
        wave = next_wave
    return retrained
