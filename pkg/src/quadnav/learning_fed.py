"""Federated asynchronous Q-learning for one tree node: K agents run
independent behavior trajectories and local updates on private tables, with
periodic weighted averaging under equal or visit-importance weights."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .environment import (
    N_ACTIONS,
    Cell,
    CellType,
    GridEnvironment,
    Rng,
    make_rng,
)
from .hierarchy import QTable, Region, TreeNode
from .learning_single import Experience, _region_step


class WeightScheme(Enum):
    EQ_AVG = "eq-avg"
    IM_AVG = "im-avg"


@dataclass
class FedConfig:
    eta: float = 0.4
    gamma: float = 0.9
    n_agents: int = 12
    sync_period: int = 1000
    total_iterations: int | None = None  # None: 200 x region cell count
    epsilon_behavior: float = 0.2
    trajectory_cap: int | None = None  # None: 2 x region cell count

    def resolved_total_iterations(self, region: Region) -> int:
        return 200 * region.cell_count if self.total_iterations is None else self.total_iterations

    def resolved_trajectory_cap(self, region: Region) -> int:
        return 2 * region.cell_count if self.trajectory_cap is None else self.trajectory_cap


class VisitCounts:
    """Per-agent (s, a) visit counters for the current sync window."""

    def __init__(self, region: Region, n_agents: int):
        self.region = region
        self.n_agents = n_agents
        self.counts = np.zeros((n_agents, region.rows, region.cols, N_ACTIONS), dtype=np.int64)

    def reset(self) -> None:
        self.counts[:] = 0


def local_step(local_q: QTable, e: Experience, eta: float, gamma: float,
               visits: VisitCounts, agent: int) -> None:
    """Q(s,a) <- (1-eta) Q(s,a) + eta (r + gamma V(s')); V(terminal) = 0."""
    sr, sc = local_q.region.start_row, local_q.region.start_col
    lr, lc = e.s[0] - sr, e.s[1] - sc
    bootstrap = 0.0 if e.terminal else float(np.max(local_q.values[e.s_next[0] - sr, e.s_next[1] - sc]))
    local_q.values[lr, lc, e.a] = (1.0 - eta) * local_q.values[lr, lc, e.a] + eta * (e.r + gamma * bootstrap)
    visits.counts[agent, lr, lc, e.a] += 1


def importance_weights(visits: VisitCounts, eta: float, s: Cell, a: int) -> np.ndarray:
    """Per-agent weights proportional to (1-eta)^(-visits); they sum to one."""
    if eta == 1:
        raise ValueError("degenerate weight base: eta = 1")
    sr, sc = visits.region.start_row, visits.region.start_col
    n = visits.counts[:, s[0] - sr, s[1] - sc, a].astype(np.float64)
    # shift by the max count so the largest factor is 1 (no overflow)
    scaled = (1.0 - eta) ** (n.max() - n)
    return scaled / scaled.sum()


def _weight_tensor(counts: np.ndarray, eta: float) -> np.ndarray:
    peak = counts.max(axis=0, keepdims=True)
    w = (1.0 - eta) ** (peak - counts)
    return w / w.sum(axis=0, keepdims=True)


def aggregate(local_qs: list[QTable], scheme: WeightScheme, visits: VisitCounts,
              eta: float) -> QTable:
    """Average the local tables entry-wise, broadcast the result back into
    every local table, and reset the visit window."""
    region = local_qs[0].region
    if any(q.region != region for q in local_qs):
        raise ValueError("local tables cover different regions")
    out = QTable(region)
    if len(local_qs) == 1:
        out.values[:] = local_qs[0].values
    elif scheme is WeightScheme.EQ_AVG:
        # mean anchored at the first table: identical inputs stay bit-identical
        base = local_qs[0].values
        delta = np.zeros_like(base)
        for q in local_qs[1:]:
            delta += q.values - base
        out.values[:] = base + delta / len(local_qs)
    else:
        if eta == 1:
            raise ValueError("degenerate weight base: eta = 1")
        w = _weight_tensor(visits.counts.astype(np.float64), eta)
        acc = np.zeros_like(out.values)
        for k, q in enumerate(local_qs):
            acc += w[k] * q.values
        out.values[:] = acc
    for q in local_qs:
        q.values[:] = out.values
    visits.reset()
    return out


def _agent_window(q: list, visit_dict: dict, state: list, steps: int,
                  cells: list[list[int]], region: Region, starts: list[Cell],
                  eta: float, gamma: float, epsilon: float, trajectory_cap: int,
                  rng: Rng) -> None:
    """Advance one agent `steps` local updates; mutates its table and state."""
    r, c, traj, restart = state
    sr, sc = region.start_row, region.start_col
    keep = 1.0 - eta
    for _ in range(steps):
        if restart:
            r, c = starts[int(rng.integers(len(starts)))]
            traj = 0
            restart = False
        if rng.random() < epsilon:
            a = int(rng.integers(N_ACTIONS))
        else:
            row = q[r - sr][c - sc]
            a = row.index(max(row))
        nr, nc, reward, terminal = _region_step(cells, region, r, c, a)
        bootstrap = 0.0 if terminal else max(q[nr - sr][nc - sc])
        lr, lc = r - sr, c - sc
        row = q[lr][lc]
        row[a] = keep * row[a] + eta * (reward + gamma * bootstrap)
        key = (lr, lc, a)
        visit_dict[key] = visit_dict.get(key, 0) + 1
        if terminal:
            restart = True
        else:
            r, c = nr, nc
            traj += 1
            if traj >= trajectory_cap:
                restart = True
    state[:] = [r, c, traj, restart]


def train_fed(node: TreeNode, env: GridEnvironment, config: FedConfig,
              scheme: WeightScheme, rng: Rng) -> None:
    """Run exactly T global iterations (one local step per agent each),
    averaging every `sync_period` iterations and once more at the end; the
    final aggregate becomes the node's Q-table."""
    region = node.region
    total = config.resolved_total_iterations(region)
    cells = env.cells.tolist()
    starts = [
        (r, c)
        for r in range(region.start_row, region.end_row + 1)
        for c in range(region.start_col, region.end_col + 1)
        if cells[r][c] == CellType.FREE
    ]
    if total <= 0 or not starts:
        node.trained = True
        return
    if scheme is WeightScheme.IM_AVG and config.eta == 1:
        raise ValueError("degenerate weight base: eta = 1")

    k_agents = config.n_agents
    trajectory_cap = config.resolved_trajectory_cap(region)
    agent_rngs = [make_rng(int(s)) for s in rng.integers(0, 2**63, size=k_agents)]
    local_values = [node.qtable.values.tolist() for _ in range(k_agents)]
    local_tables = [node.qtable.copy() for _ in range(k_agents)]
    visit_dicts: list[dict] = [{} for _ in range(k_agents)]
    states = [[0, 0, 0, True] for _ in range(k_agents)]
    visits = VisitCounts(region, k_agents)

    merged = node.qtable
    done = 0
    while done < total:
        window = min(config.sync_period, total - done)
        for k in range(k_agents):
            _agent_window(local_values[k], visit_dicts[k], states[k], window,
                          cells, region, starts, config.eta, config.gamma,
                          config.epsilon_behavior, trajectory_cap, agent_rngs[k])
        done += window
        for k in range(k_agents):
            local_tables[k].values[:] = local_values[k]
            agent_counts = visits.counts[k]
            for (lr, lc, a), count in visit_dicts[k].items():
                agent_counts[lr, lc, a] = count
        merged = aggregate(local_tables, scheme, visits, config.eta)
        for k in range(k_agents):
            local_values[k] = merged.values.tolist()
            visit_dicts[k] = {}
    node.qtable.values[:] = merged.values
    node.trained = True
