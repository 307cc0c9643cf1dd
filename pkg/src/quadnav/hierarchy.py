"""Quadtree decomposition of the grid, per-node Q-tables with upward and
downward propagation, and the greedy / two-best path search that scores how
well the consolidated policy covers a region."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .environment import ACTION_OFFSETS, N_ACTIONS, Cell, CellType, GridEnvironment

MAX_LEAF_DIM = 20
UNTRAINED_RATE = -1.0
POLICY_ARROWS = "↑↗→↘↓↙←↖"


@dataclass(frozen=True, order=True)
class Region:
    """Inclusive rectangular block of grid cells."""

    start_row: int
    start_col: int
    end_row: int
    end_col: int

    def __post_init__(self):
        if self.start_row > self.end_row or self.start_col > self.end_col:
            raise ValueError(f"empty region {self}")

    @property
    def rows(self) -> int:
        return self.end_row - self.start_row + 1

    @property
    def cols(self) -> int:
        return self.end_col - self.start_col + 1

    @property
    def cell_count(self) -> int:
        return self.rows * self.cols

    def contains(self, r: int, c: int) -> bool:
        return self.start_row <= r <= self.end_row and self.start_col <= c <= self.end_col

    def contains_region(self, other: "Region") -> bool:
        return (self.start_row <= other.start_row and other.end_row <= self.end_row
                and self.start_col <= other.start_col and other.end_col <= self.end_col)


class QTable:
    """Dense (rows, cols, 8) action-value block addressed by global grid coordinates."""

    def __init__(self, region: Region):
        self.region = region
        self.values = np.zeros((region.rows, region.cols, N_ACTIONS))

    def block(self, region: Region) -> np.ndarray:
        """Writable view of the sub-block covering `region`."""
        if not self.region.contains_region(region):
            raise ValueError(f"{region} not inside {self.region}")
        r0 = region.start_row - self.region.start_row
        c0 = region.start_col - self.region.start_col
        return self.values[r0:r0 + region.rows, c0:c0 + region.cols]

    def copy(self) -> "QTable":
        out = QTable(self.region)
        out.values[:] = self.values
        return out


class TreeNode:
    """One quadtree region; child regions tile the parent exactly."""

    def __init__(self, region: Region, parent: "TreeNode | None" = None):
        self.region = region
        self.parent = parent
        self.children: list[TreeNode] = []
        self.qtable = QTable(region)
        self.success_rate = UNTRAINED_RATE
        self.trained = False

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def nodes(self) -> list["TreeNode"]:
        out = [self]
        stack = list(self.children)
        while stack:
            node = stack.pop()
            out.append(node)
            stack.extend(node.children)
        return out

    def leaves(self) -> list["TreeNode"]:
        return [node for node in self.nodes() if node.is_leaf]

    def height(self) -> int:
        if self.is_leaf:
            return 1
        return 1 + max(child.height() for child in self.children)

    def __repr__(self) -> str:
        return f"TreeNode({self.region}, leaf={self.is_leaf}, rate={self.success_rate:.3f})"


def decompose(rows: int, cols: int) -> TreeNode:
    """Split the grid into quarters until both dimensions fit in a leaf."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be positive")
    root = TreeNode(Region(0, 0, rows - 1, cols - 1))
    _split(root)
    return root


def _split(node: TreeNode) -> None:
    region = node.region
    if region.rows <= MAX_LEAF_DIM and region.cols <= MAX_LEAF_DIM:
        return
    mid_row = (region.start_row + region.end_row) // 2
    mid_col = (region.start_col + region.end_col) // 2
    quarters = (
        (region.start_row, region.start_col, mid_row, mid_col),
        (region.start_row, mid_col + 1, mid_row, region.end_col),
        (mid_row + 1, region.start_col, region.end_row, mid_col),
        (mid_row + 1, mid_col + 1, region.end_row, region.end_col),
    )
    for sr, sc, er, ec in quarters:
        if sr > er or sc > ec:
            continue  # sliver grids (single row/col halves) yield empty quarters
        child = TreeNode(Region(sr, sc, er, ec), parent=node)
        node.children.append(child)
        _split(child)


def leaves_for_changes(root: TreeNode, changes) -> set[TreeNode]:
    """Leaf nodes whose regions contain at least one change position."""
    affected: set[TreeNode] = set()
    for event in changes:
        r, c = event.position
        if not root.region.contains(r, c):
            raise ValueError(f"unlocalizable change at {(r, c)}")
        node = root
        while node.children:
            node = next(ch for ch in node.children if ch.region.contains(r, c))
        affected.add(node)
    return affected


def propagate_up(node: TreeNode) -> None:
    """Copy this node's Q-values into the matching block of every ancestor."""
    ancestor = node.parent
    while ancestor is not None:
        ancestor.qtable.block(node.region)[:] = node.qtable.values
        ancestor = ancestor.parent


def propagate_down(node: TreeNode) -> None:
    """Overwrite every descendant's Q-table with this node's values."""
    stack = list(node.children)
    while stack:
        descendant = stack.pop()
        descendant.qtable.values[:] = node.qtable.block(descendant.region)
        stack.extend(descendant.children)


class _SearchContext:
    """Per-cell best and second-best actions for one (Q-table, region) view."""

    __slots__ = ("region", "cells", "top1", "top2")

    def __init__(self, qtable: QTable, env: GridEnvironment, region: Region):
        block = qtable.block(region)
        # stable sort keeps equal values in index order, i.e. lowest-index ties
        order = np.argsort(-block, axis=2, kind="stable")
        self.region = region
        self.cells = env.cells.tolist()
        self.top1 = order[:, :, 0].tolist()
        self.top2 = order[:, :, 1].tolist()


def _search(ctx: _SearchContext, start: Cell, failed_memo: set | None = None) -> list[Cell] | None:
    """Greedy walk, then depth-first search over the two best actions per cell.

    `failed_memo` collects cells proven unable to reach a station; searches
    may consult and extend it because two-best reachability is monotone along
    edges of the induced action graph.
    """
    region = ctx.region
    cells = ctx.cells
    sr, sc = region.start_row, region.start_col
    r0, c0 = start
    if cells[r0][c0] == CellType.STATION:
        return [start]
    if failed_memo and start in failed_memo:
        return None
    top1 = ctx.top1
    top2 = ctx.top2
    offsets = ACTION_OFFSETS

    # phase 1: follow the single best action, at most one step per region cell
    path = [start]
    r, c = r0, c0
    for _ in range(region.cell_count):
        a = top1[r - sr][c - sc]
        dr, dc = offsets[a]
        tr, tc = r + dr, c + dc
        if not region.contains(tr, tc):
            break
        kind = cells[tr][tc]
        if kind == CellType.OBSTACLE:
            break
        path.append((tr, tc))
        if kind == CellType.STATION:
            return path
        r, c = tr, tc

    # phase 2: bounded DFS branching over the two best actions per state
    budget = region.cell_count
    stack = [start]
    visited = {start}
    parents: dict[Cell, Cell] = {}
    expansions = 0
    while stack and expansions < budget:
        cur = stack.pop()
        expansions += 1
        cr, cc = cur
        lr, lc = cr - sr, cc - sc
        for a in (top2[lr][lc], top1[lr][lc]):  # best action on top of the stack
            dr, dc = offsets[a]
            tr, tc = cr + dr, cc + dc
            if not region.contains(tr, tc):
                continue
            kind = cells[tr][tc]
            if kind == CellType.OBSTACLE:
                continue
            nxt = (tr, tc)
            if kind == CellType.STATION:
                out = [cur]
                while out[-1] != start:
                    out.append(parents[out[-1]])
                out.reverse()
                out.append(nxt)
                return out
            if nxt not in visited and not (failed_memo and nxt in failed_memo):
                visited.add(nxt)
                parents[nxt] = cur
                stack.append(nxt)
    if failed_memo is not None:
        failed_memo.update(visited)
    return None


def path_search(qtable: QTable, start: Cell, env: GridEnvironment,
                region: Region | None = None) -> list[Cell] | None:
    """Path from `start` to a station under the table's policy, or None.

    The search is confined to `region` (the table's own region by default):
    a greedy argmax walk first, then a depth-first search over the two
    highest-valued actions per cell.
    """
    region = region or qtable.region
    r, c = start
    if not region.contains(r, c):
        raise ValueError(f"start {start} outside {region}")
    if env.cells[r, c] == CellType.OBSTACLE:
        raise ValueError(f"start {start} is an obstacle")
    return _search(_SearchContext(qtable, env, region), start)


def evaluate_policy(qtable: QTable, env: GridEnvironment,
                    region: Region) -> tuple[float, float | None]:
    """Success rate over a region plus the mean successful-path step count.

    Stations count as immediate successes (length 0); obstacle cells are
    excluded from the denominator. An all-obstacle region scores 1.0.
    """
    ctx = _SearchContext(qtable, env, region)
    failed: set[Cell] = set()
    eligible = 0
    lengths: list[int] = []
    for r in range(region.start_row, region.end_row + 1):
        row = ctx.cells[r]
        for c in range(region.start_col, region.end_col + 1):
            kind = row[c]
            if kind == CellType.OBSTACLE:
                continue
            eligible += 1
            if kind == CellType.STATION:
                lengths.append(0)
                continue
            found = _search(ctx, (r, c), failed_memo=failed)
            if found is not None:
                lengths.append(len(found) - 1)
    rate = 1.0 if eligible == 0 else len(lengths) / eligible
    mean_length = sum(lengths) / len(lengths) if lengths else None
    return rate, mean_length


def compute_success_rate(node: TreeNode, root: TreeNode, env: GridEnvironment) -> float:
    """Fraction of the node's non-obstacle cells from which the consolidated
    root policy reaches a station without leaving the node's region."""
    rate, _ = evaluate_policy(root.qtable, env, node.region)
    return rate


@dataclass(frozen=True)
class Policy:
    """Per-cell argmax actions derived from a Q-table (lowest index on ties)."""

    region: Region
    actions: np.ndarray


def extract_policy(root: TreeNode, region: Region) -> Policy:
    block = root.qtable.block(region)
    return Policy(region, np.argmax(block, axis=2))  # argmax takes the first maximum


def policy_text(policy: Policy, env: GridEnvironment) -> str:
    """Render a policy as a glyph grid: arrows plus '#' obstacles and 'C' stations."""
    region = policy.region
    lines = []
    for r in range(region.start_row, region.end_row + 1):
        chars = []
        for c in range(region.start_col, region.end_col + 1):
            kind = env.cells[r, c]
            if kind == CellType.OBSTACLE:
                chars.append("#")
            elif kind == CellType.STATION:
                chars.append("C")
            else:
                chars.append(POLICY_ARROWS[policy.actions[r - region.start_row, c - region.start_col]])
        lines.append("".join(chars))
    return "\n".join(lines) + "\n"
