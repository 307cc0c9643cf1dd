"""Independent reference implementations used as test oracles.

These stay deliberately naive (BFS over explicit graphs, per-cell argmax
recomputation) so they share no code path with the package internals.
"""

from collections import deque

import numpy as np

from quadnav import ACTION_OFFSETS, CellType


def bfs_station_distances(env) -> dict:
    """Multi-source BFS from every station over 8-connected non-obstacle cells."""
    dist = {station: 0 for station in env.station_positions()}
    queue = deque(dist)
    while queue:
        r, c = queue.popleft()
        for dr, dc in ACTION_OFFSETS:
            t = (r + dr, c + dc)
            if env.in_bounds(*t) and env.cells[t] != CellType.OBSTACLE and t not in dist:
                dist[t] = dist[(r, c)] + 1
                queue.append(t)
    return dist


def bfs_reachable_fraction(env) -> float:
    reachable = len(bfs_station_distances(env))
    eligible = int((env.cells != CellType.OBSTACLE).sum())
    return reachable / eligible


def _two_best(q_cell) -> tuple[int, int]:
    order = sorted(range(len(q_cell)), key=lambda a: (-q_cell[a], a))
    return order[0], order[1]


def brute_force_region_success(q_block: np.ndarray, env, region) -> float:
    """Success rate of the greedy / two-best search, recomputed from scratch.

    Phase one follows per-cell argmax for at most rows*cols steps. Phase two is
    plain reachability over the directed graph whose edges are each cell's two
    best actions (success and failure are traversal-order independent).
    """
    sr, sc = region.start_row, region.start_col
    rows = region.end_row - region.start_row + 1
    cols = region.end_col - region.start_col + 1
    cells = env.cells

    def contains(r, c):
        return region.start_row <= r <= region.end_row and region.start_col <= c <= region.end_col

    def phase_one(start) -> bool:
        r, c = start
        for _ in range(rows * cols):
            a = int(np.argmax(q_block[r - sr, c - sc]))
            dr, dc = ACTION_OFFSETS[a]
            tr, tc = r + dr, c + dc
            if not contains(tr, tc) or cells[tr, tc] == CellType.OBSTACLE:
                return False
            if cells[tr, tc] == CellType.STATION:
                return True
            r, c = tr, tc
        return False

    def phase_two(start) -> bool:
        seen = {start}
        queue = deque([start])
        while queue:
            r, c = queue.popleft()
            for a in _two_best(list(q_block[r - sr, c - sc])):
                dr, dc = ACTION_OFFSETS[a]
                tr, tc = r + dr, c + dc
                if not contains(tr, tc) or cells[tr, tc] == CellType.OBSTACLE:
                    continue
                if cells[tr, tc] == CellType.STATION:
                    return True
                if (tr, tc) not in seen:
                    seen.add((tr, tc))
                    queue.append((tr, tc))
        return False

    eligible = 0
    successes = 0
    for r in range(region.start_row, region.end_row + 1):
        for c in range(region.start_col, region.end_col + 1):
            kind = cells[r, c]
            if kind == CellType.OBSTACLE:
                continue
            eligible += 1
            if kind == CellType.STATION or phase_one((r, c)) or phase_two((r, c)):
                successes += 1
    return 1.0 if eligible == 0 else successes / eligible
