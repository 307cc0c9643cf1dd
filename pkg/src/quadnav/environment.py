"""Grid-maze MDP: seeded generation, deterministic transitions, and the
obstacle-change simulator that drives dynamic replanning runs."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Sequence

import numpy as np

Cell = tuple[int, int]
Action = int
Rng = np.random.Generator


class CellType(IntEnum):
    FREE = 0
    OBSTACLE = 1
    STATION = 2


# action index -> (drow, dcol); compass order 0=N, 1=NE, 2=E, ... 7=NW
ACTION_OFFSETS: tuple[Cell, ...] = (
    (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1),
)
ACTION_NAMES = ("N", "NE", "E", "SE", "S", "SW", "W", "NW")
N_ACTIONS = 8

REWARD_STATION = 100.0
REWARD_BUMP = -10.0
REWARD_STEP = -1.0

_GENERATION_ATTEMPTS = 1000
_MOVE_ATTEMPTS = 1000

_CELL_CHARS = {CellType.FREE: ".", CellType.OBSTACLE: "#", CellType.STATION: "C"}
_CHAR_CELLS = {char: cell for cell, char in _CELL_CHARS.items()}


def make_rng(seed: int | Sequence[int]) -> Rng:
    """Deterministic draw stream: identical seed, identical sequence (PCG64)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


class Difficulty(Enum):
    """Per-cell draw probabilities (free, obstacle, station)."""

    EASY = (0.8, 0.18, 0.02)
    MEDIUM = (0.7, 0.29, 0.01)
    HARD = (0.6, 0.395, 0.005)

    @property
    def p_free(self) -> float:
        return self.value[0]

    @property
    def p_obstacle(self) -> float:
        return self.value[1]

    @property
    def p_station(self) -> float:
        return self.value[2]

    @property
    def index(self) -> int:
        return list(Difficulty).index(self)

    @classmethod
    def from_name(cls, name: str) -> "Difficulty":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown difficulty {name!r}") from None


class GridEnvironment:
    """Immutable snapshot of the maze; `apply_changes` returns new snapshots."""

    def __init__(self, rows: int, cols: int, cells: np.ndarray, seed: int):
        cells = np.asarray(cells, dtype=np.int8)
        if cells.shape != (rows, cols):
            raise ValueError(f"cells shape {cells.shape} != ({rows}, {cols})")
        self.rows = rows
        self.cols = cols
        self.cells = cells
        self.seed = seed
        self.cells.flags.writeable = False

    def in_bounds(self, r: int, c: int) -> bool:
        return 0 <= r < self.rows and 0 <= c < self.cols

    def cell(self, r: int, c: int) -> CellType:
        return CellType(self.cells[r, c])

    def station_positions(self) -> list[Cell]:
        return [(int(r), int(c)) for r, c in np.argwhere(self.cells == CellType.STATION)]

    def counts(self) -> dict[CellType, int]:
        return {kind: int((self.cells == kind).sum()) for kind in CellType}

    def with_cells(self, cells: np.ndarray) -> "GridEnvironment":
        return GridEnvironment(self.rows, self.cols, cells, self.seed)

    def to_text(self) -> str:
        lines = [f"{self.rows} {self.cols} {self.seed}"]
        for row in self.cells:
            lines.append("".join(_CELL_CHARS[CellType(v)] for v in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GridEnvironment":
        lines = [line for line in text.splitlines() if line]
        if not lines:
            raise ValueError("empty environment dump")
        try:
            rows, cols, seed = (int(tok) for tok in lines[0].split())
        except ValueError:
            raise ValueError(f"bad header line {lines[0]!r}") from None
        body = lines[1:]
        if len(body) != rows:
            raise ValueError(f"expected {rows} grid rows, got {len(body)}")
        cells = np.zeros((rows, cols), dtype=np.int8)
        for r, line in enumerate(body):
            if len(line) != cols:
                raise ValueError(f"row {r} has {len(line)} cells, expected {cols}")
            for c, char in enumerate(line):
                if char not in _CHAR_CELLS:
                    raise ValueError(f"unknown cell character {char!r} at ({r}, {c})")
                cells[r, c] = _CHAR_CELLS[char]
        return cls(rows, cols, cells, seed)


def _draw_cells(rng: Rng, rows: int, cols: int, difficulty: Difficulty) -> np.ndarray:
    u = rng.random((rows, cols))
    cells = np.full((rows, cols), CellType.FREE, dtype=np.int8)
    cells[u >= difficulty.p_free] = CellType.OBSTACLE
    cells[u >= difficulty.p_free + difficulty.p_obstacle] = CellType.STATION
    return cells


def generate(seed: int, rows: int, cols: int, difficulty: Difficulty) -> GridEnvironment:
    """Draw every cell independently from the seeded stream; redraw the whole
    grid (bounded) until it contains at least one station."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be positive")
    rng = make_rng(seed)
    for _ in range(_GENERATION_ATTEMPTS):
        cells = _draw_cells(rng, rows, cols, difficulty)
        if (cells == CellType.STATION).any():
            return GridEnvironment(rows, cols, cells, seed)
    raise RuntimeError("degenerate generation: no station after bounded redraws")


def generate_edge_case(seed: int) -> GridEnvironment:
    """Hard 50x50 grid whose top-left 25x25 quadrant is scrubbed of stations."""
    rng = make_rng(seed)
    for _ in range(_GENERATION_ATTEMPTS):
        cells = _draw_cells(rng, 50, 50, Difficulty.HARD)
        quadrant = cells[:25, :25]
        quadrant[quadrant == CellType.STATION] = CellType.FREE
        if (cells == CellType.STATION).any():
            return GridEnvironment(50, 50, cells, seed)
    raise RuntimeError("degenerate generation: no station after bounded redraws")


def step(env: GridEnvironment, state: Cell, action: Action) -> tuple[Cell, float, bool]:
    """Deterministic MDP transition; the grid border behaves like an obstacle."""
    r, c = state
    if not env.in_bounds(r, c) or env.cells[r, c] == CellType.OBSTACLE:
        raise ValueError(f"invalid state {state}")
    dr, dc = ACTION_OFFSETS[action]
    tr, tc = r + dr, c + dc
    if not env.in_bounds(tr, tc) or env.cells[tr, tc] == CellType.OBSTACLE:
        return state, REWARD_BUMP, False
    if env.cells[tr, tc] == CellType.STATION:
        return (tr, tc), REWARD_STATION, True
    return (tr, tc), REWARD_STEP, False


_CHANGE_THRESHOLDS = (
    (900, 1), (950, 2), (970, 3), (980, 4), (987, 5),
    (992, 6), (995, 7), (997, 8), (999, 9),
)


def change_count_from_draw(r: int) -> int:
    for limit, count in _CHANGE_THRESHOLDS:
        if r < limit:
            return count
    return 10


def sample_change_count(rng: Rng) -> int:
    """Number of simultaneous obstacle moves for one time step, skewed toward 1."""
    return change_count_from_draw(int(rng.integers(1000)))


@dataclass(frozen=True)
class ChangeEvent:
    """One obstacle move, recorded at the cell that flipped Free -> Obstacle."""

    position: Cell
    before: CellType
    after: CellType

    def __post_init__(self):
        if self.before == self.after:
            raise ValueError("change must alter the cell")
        if CellType.STATION in (self.before, self.after):
            raise ValueError("stations never change")


def apply_changes(env: GridEnvironment, rng: Rng, n: int) -> tuple[GridEnvironment, list[ChangeEvent]]:
    """Move `n` obstacles, each onto a uniformly chosen free 8-neighbor.

    The swap conserves cell counts and never touches stations. Returns the new
    snapshot plus one event per move, in application order.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    cells = env.cells.copy()
    if not (cells == CellType.OBSTACLE).any() or not (cells == CellType.FREE).any():
        raise ValueError("environment needs at least one obstacle and one free cell")
    rows, cols = env.rows, env.cols
    events: list[ChangeEvent] = []
    for _ in range(n):
        for _ in range(_MOVE_ATTEMPTS):
            obstacles = np.argwhere(cells == CellType.OBSTACLE)
            r, c = (int(v) for v in obstacles[int(rng.integers(len(obstacles)))])
            free_neighbors = [
                (r + dr, c + dc)
                for dr, dc in ACTION_OFFSETS
                if 0 <= r + dr < rows and 0 <= c + dc < cols
                and cells[r + dr, c + dc] == CellType.FREE
            ]
            if not free_neighbors:
                continue
            tr, tc = free_neighbors[int(rng.integers(len(free_neighbors)))]
            cells[r, c] = CellType.FREE
            cells[tr, tc] = CellType.OBSTACLE
            events.append(ChangeEvent((tr, tc), CellType.FREE, CellType.OBSTACLE))
            break
        else:
            raise RuntimeError("no movable obstacle")
    return env.with_cells(cells), events
