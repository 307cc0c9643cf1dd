"""A* shortest paths to the nearest charging station under a Chebyshev
heuristic, whole-grid path tables with sub-path reuse, and the static and
oracle evaluation baselines."""

from __future__ import annotations

import heapq
from functools import lru_cache

import numpy as np

from .environment import ACTION_OFFSETS, Cell, CellType, GridEnvironment

Path = list[Cell]


class PathTable:
    """Shortest path per non-obstacle cell; cells without one are absent."""

    def __init__(self, rows: int, cols: int, paths: dict[Cell, Path]):
        self.rows = rows
        self.cols = cols
        self.paths = paths

    def get(self, cell: Cell) -> Path | None:
        return self.paths.get(cell)

    def __len__(self) -> int:
        return len(self.paths)


def chebyshev(a: Cell, b: Cell) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


@lru_cache(maxsize=8)
def _station_field(env: GridEnvironment) -> np.ndarray:
    """Obstacle-ignoring Chebyshev distance to the nearest station, per cell.

    Admissible for 8-connected unit-cost moves, so A* stays optimal. Cached on
    the (immutable) snapshot identity.
    """
    big = env.rows + env.cols
    field = np.full((env.rows, env.cols), big, dtype=np.int64)
    rr = np.arange(env.rows)[:, None]
    cc = np.arange(env.cols)[None, :]
    for sr, sc in env.station_positions():
        np.minimum(field, np.maximum(np.abs(rr - sr), np.abs(cc - sc)), out=field)
    field.flags.writeable = False
    return field


def _astar(cells: list[list[int]], rows: int, cols: int, start: Cell,
           field: list[list[int]]) -> tuple[Path | None, list[Cell]]:
    """Single search; returns (path, closed cells in expansion order)."""
    r0, c0 = start
    if cells[r0][c0] == CellType.STATION:
        return [start], []
    inf = float("inf")
    g = [[inf] * cols for _ in range(rows)]
    closed = [[False] * cols for _ in range(rows)]
    closed_order: list[Cell] = []
    parents: dict[Cell, Cell] = {}
    g[r0][c0] = 0
    h0 = field[r0][c0]
    heap: list[tuple[float, int, int, int]] = [(h0, h0, r0, c0)]
    while heap:
        _, _, r, c = heapq.heappop(heap)
        if closed[r][c]:
            continue
        closed[r][c] = True
        closed_order.append((r, c))
        if cells[r][c] == CellType.STATION:
            path = [(r, c)]
            while path[-1] != start:
                path.append(parents[path[-1]])
            path.reverse()
            return path, closed_order
        ng = g[r][c] + 1
        for dr, dc in ACTION_OFFSETS:
            tr, tc = r + dr, c + dc
            if 0 <= tr < rows and 0 <= tc < cols and not closed[tr][tc] \
                    and cells[tr][tc] != CellType.OBSTACLE and ng < g[tr][tc]:
                g[tr][tc] = ng
                parents[(tr, tc)] = (r, c)
                h = field[tr][tc]
                heapq.heappush(heap, (ng + h, h, tr, tc))
    return None, closed_order


def astar_path(env: GridEnvironment, start: Cell) -> Path | None:
    """Shortest 8-connected unit-cost path from `start` to the nearest
    station, or None when no station is reachable.

    Ties break deterministically on (f, h, row, col).
    """
    r, c = start
    if not env.in_bounds(r, c) or env.cells[r, c] == CellType.OBSTACLE:
        raise ValueError(f"invalid start {start}")
    path, _ = _astar(env.cells.tolist(), env.rows, env.cols, start,
                     _station_field(env).tolist())
    return path


def plan_all(env: GridEnvironment) -> PathTable:
    """Paths for every non-obstacle cell, reusing suffixes of already found
    shortest paths (a suffix of a shortest path to the nearest station is
    itself one)."""
    cells = env.cells.tolist()
    field = _station_field(env).tolist()
    paths: dict[Cell, Path] = {}
    unreachable: set[Cell] = set()
    for r in range(env.rows):
        for c in range(env.cols):
            if cells[r][c] == CellType.OBSTACLE:
                continue
            cell = (r, c)
            if cell in paths or cell in unreachable:
                continue
            path, closed = _astar(cells, env.rows, env.cols, cell, field)
            if path is None:
                # a failed search exhausts the connected component
                unreachable.update(closed)
            else:
                for i, waypoint in enumerate(path):
                    if waypoint not in paths:
                        paths[waypoint] = path[i:]
    return PathTable(env.rows, env.cols, paths)


def path_is_valid(path: Path, env: GridEnvironment) -> bool:
    """True iff no path cell is currently an obstacle and it ends on a station."""
    cells = env.cells
    for r, c in path:
        if cells[r, c] == CellType.OBSTACLE:
            return False
    return cells[path[-1][0], path[-1][1]] == CellType.STATION


def static_evaluate(table: PathTable, env_now: GridEnvironment) -> float:
    """Fraction of current non-obstacle cells whose stored path still works."""
    eligible = 0
    valid = 0
    for r in range(env_now.rows):
        for c in range(env_now.cols):
            if env_now.cells[r, c] == CellType.OBSTACLE:
                continue
            eligible += 1
            path = table.get((r, c))
            if path is not None and path_is_valid(path, env_now):
                valid += 1
    return 1.0 if eligible == 0 else valid / eligible


def oracle_step(env_now: GridEnvironment) -> tuple[PathTable, float]:
    """Replan the whole grid on the current snapshot; the success rate is the
    fraction of non-obstacle cells with a path."""
    table = plan_all(env_now)
    eligible = int((env_now.cells != CellType.OBSTACLE).sum())
    rate = 1.0 if eligible == 0 else len(table) / eligible
    return table, rate
