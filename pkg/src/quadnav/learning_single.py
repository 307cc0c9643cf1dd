"""Single-agent tabular Q-learning for one tree node: epsilon-greedy episodes,
an experience replay buffer, prioritized start selection, and snapshot-based
convergence detection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .environment import (
    ACTION_OFFSETS,
    N_ACTIONS,
    REWARD_BUMP,
    REWARD_STATION,
    REWARD_STEP,
    Cell,
    CellType,
    GridEnvironment,
    Rng,
)
from .hierarchy import QTable, Region, TreeNode


class Experience(NamedTuple):
    s: Cell
    a: int
    r: float
    s_next: Cell
    terminal: bool


class ReplayBuffer:
    """Stores transitions until full; the trainer replays them once and clears."""

    def __init__(self, capacity: int = 1000):
        self.capacity = capacity
        self.experiences: list[Experience] = []

    def add(self, experience: Experience) -> None:
        self.experiences.append(experience)

    def clear(self) -> None:
        self.experiences.clear()

    def __len__(self) -> int:
        return len(self.experiences)


class StartSelector:
    """Per-cell pick/success counters that bias episode starts toward cells
    the agent has not yet learned to solve."""

    def __init__(self, region: Region, env: GridEnvironment):
        self.cells: list[Cell] = [
            (r, c)
            for r in range(region.start_row, region.end_row + 1)
            for c in range(region.start_col, region.end_col + 1)
            if env.cells[r, c] != CellType.OBSTACLE
        ]
        self._index = {cell: i for i, cell in enumerate(self.cells)}
        self.pick_counts = [0] * len(self.cells)
        self.success_counts = [0] * len(self.cells)

    def weights(self) -> list[float]:
        return [
            1.0 - s / (p + 1)
            for p, s in zip(self.pick_counts, self.success_counts)
        ]

    def record_success(self, cell: Cell) -> None:
        self.success_counts[self._index[cell]] += 1


def select_start(sel: StartSelector, rng: Rng) -> Cell:
    """Weighted draw over eligible cells; increments the winner's pick count."""
    if not sel.cells:
        raise ValueError("no eligible start cells")
    weights = sel.weights()
    x = rng.random() * sum(weights)
    acc = 0.0
    chosen = len(weights) - 1
    for i, w in enumerate(weights):
        acc += w
        if x < acc:
            chosen = i
            break
    sel.pick_counts[chosen] += 1
    return sel.cells[chosen]


@dataclass
class LearnerConfig:
    alpha: float = 0.4
    gamma: float = 0.9
    epsilon: float = 0.1
    convergence_threshold: float = 5e-4
    convergence_check_period: int = 50
    convergence_consecutive: int = 2
    max_episodes: int | None = None  # None: 1000 x region cell count
    episode_step_cap: int | None = None  # None: 4 x region cell count

    def resolved_max_episodes(self, region: Region) -> int:
        # roomy safety valve: with eps=0.1 the convergence detector needs a
        # few hundred episodes per cell before rarely-explored entries settle
        return 1000 * region.cell_count if self.max_episodes is None else self.max_episodes

    def resolved_step_cap(self, region: Region) -> int:
        return 4 * region.cell_count if self.episode_step_cap is None else self.episode_step_cap


def q_update(qtable: QTable, e: Experience, alpha: float, gamma: float) -> None:
    """Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)); terminal
    transitions bootstrap from zero."""
    sr, sc = qtable.region.start_row, qtable.region.start_col
    lr, lc = e.s[0] - sr, e.s[1] - sc
    bootstrap = 0.0 if e.terminal else float(np.max(qtable.values[e.s_next[0] - sr, e.s_next[1] - sc]))
    old = qtable.values[lr, lc, e.a]
    qtable.values[lr, lc, e.a] = old + alpha * (e.r + gamma * bootstrap - old)


def check_convergence(prev: QTable, cur: QTable, threshold: float) -> bool:
    """True iff no entry moved by `threshold` or more between snapshots."""
    if prev.region != cur.region:
        raise ValueError("snapshots cover different regions")
    return float(np.max(np.abs(cur.values - prev.values))) < threshold


def _region_step(cells: list[list[int]], region: Region, r: int, c: int,
                 action: int) -> tuple[int, int, float, bool]:
    """`environment.step` semantics with the region border treated as an obstacle."""
    dr, dc = ACTION_OFFSETS[action]
    tr, tc = r + dr, c + dc
    if (tr < region.start_row or tr > region.end_row
            or tc < region.start_col or tc > region.end_col):
        return r, c, REWARD_BUMP, False
    kind = cells[tr][tc]
    if kind == CellType.OBSTACLE:
        return r, c, REWARD_BUMP, False
    if kind == CellType.STATION:
        return tr, tc, REWARD_STATION, True
    return tr, tc, REWARD_STEP, False


def _replay(q: list, buffer: ReplayBuffer, alpha: float, gamma: float, region: Region) -> None:
    sr, sc = region.start_row, region.start_col
    for (s, a, reward, s_next, terminal) in buffer.experiences:
        bootstrap = 0.0 if terminal else max(q[s_next[0] - sr][s_next[1] - sc])
        row = q[s[0] - sr][s[1] - sc]
        row[a] += alpha * (reward + gamma * bootstrap - row[a])
    buffer.clear()


def _episode(q: list, cells: list[list[int]], region: Region, config: LearnerConfig,
             sel: StartSelector, buffer: ReplayBuffer, rng: Rng, step_cap: int) -> bool:
    start = select_start(sel, rng)
    r, c = start
    if cells[r][c] == CellType.STATION:
        sel.record_success(start)
        return True
    sr, sc = region.start_row, region.start_col
    alpha, gamma, epsilon = config.alpha, config.gamma, config.epsilon
    capacity = buffer.capacity
    success = False
    for _ in range(step_cap):
        if rng.random() < epsilon:
            a = int(rng.integers(N_ACTIONS))
        else:
            row = q[r - sr][c - sc]
            a = row.index(max(row))
        nr, nc, reward, terminal = _region_step(cells, region, r, c, a)
        bootstrap = 0.0 if terminal else max(q[nr - sr][nc - sc])
        row = q[r - sr][c - sc]
        row[a] += alpha * (reward + gamma * bootstrap - row[a])
        buffer.add(Experience((r, c), a, reward, (nr, nc), terminal))
        if len(buffer) >= capacity:
            _replay(q, buffer, alpha, gamma, region)
        if terminal:
            success = True
            break
        r, c = nr, nc
    if success:
        sel.record_success(start)
    return success


def run_episode(node: TreeNode, env: GridEnvironment, config: LearnerConfig,
                sel: StartSelector, buffer: ReplayBuffer, rng: Rng) -> bool:
    """One epsilon-greedy episode confined to the node's region; returns
    whether it reached a station."""
    q = node.qtable.values.tolist()
    success = _episode(q, env.cells.tolist(), node.region, config, sel, buffer,
                       rng, config.resolved_step_cap(node.region))
    node.qtable.values[:] = q
    return success


def train_single(node: TreeNode, env: GridEnvironment, config: LearnerConfig, rng: Rng) -> int:
    """Run episodes until the Q-table stops moving (checked every
    `convergence_check_period` episodes, `convergence_consecutive` quiet checks
    in a row) or the episode budget runs out. Returns the episode count.

    Marks the node trained; propagation is the caller's job.
    """
    region = node.region
    sel = StartSelector(region, env)
    if not sel.cells:
        node.trained = True
        return 0
    buffer = ReplayBuffer()
    cells = env.cells.tolist()
    q = node.qtable.values.tolist()
    step_cap = config.resolved_step_cap(region)
    max_episodes = config.resolved_max_episodes(region)
    period = config.convergence_check_period
    snapshot = np.array(q)
    quiet_checks = 0
    episodes = 0
    while episodes < max_episodes:
        _episode(q, cells, region, config, sel, buffer, rng, step_cap)
        episodes += 1
        if episodes % period == 0:
            current = np.array(q)
            if float(np.max(np.abs(current - snapshot))) < config.convergence_threshold:
                quiet_checks += 1
            else:
                quiet_checks = 0
            snapshot = current
            if quiet_checks >= config.convergence_consecutive:
                break
    node.qtable.values[:] = q
    node.trained = True
    return episodes
