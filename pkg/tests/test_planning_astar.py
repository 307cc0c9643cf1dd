import pytest

from quadnav import (
    CellType,
    Difficulty,
    apply_changes,
    astar_path,
    chebyshev,
    generate,
    make_rng,
    oracle_step,
    plan_all,
    static_evaluate,
)
from quadnav.planning_astar import PathTable, path_is_valid

from _oracles import bfs_reachable_fraction, bfs_station_distances

from test_environment import grid_from_text


class TestChebyshev:
    @pytest.mark.parametrize("a,b,expected", [
        ((0, 0), (3, 1), 3),
        ((2, 2), (2, 2), 0),
        ((0, 0), (5, 5), 5),
        ((4, 1), (0, 9), 8),
    ])
    def test_values(self, a, b, expected):
        assert chebyshev(a, b) == expected

    def test_symmetry(self):
        assert chebyshev((1, 7), (4, 2)) == chebyshev((4, 2), (1, 7))


class TestAstarPath:
    def test_open_grid_diagonal_distance(self):
        rows = ["." * 10 for _ in range(10)]
        rows[3] = rows[3][:3] + "C" + rows[3][4:]
        env = grid_from_text("\n".join(rows))
        path = astar_path(env, (0, 0))
        assert path is not None and len(path) - 1 == 3

    def test_start_on_station(self):
        env = grid_from_text("C..")
        assert astar_path(env, (0, 0)) == [(0, 0)]

    def test_walled_station_unreachable(self):
        env = grid_from_text(
            """
            .....
            .###.
            .#C#.
            .###.
            .....
            """
        )
        assert astar_path(env, (0, 0)) is None

    def test_invalid_start_rejected(self):
        env = grid_from_text(".#C")
        with pytest.raises(ValueError, match="invalid start"):
            astar_path(env, (0, 1))

    def test_path_cells_adjacent_and_legal(self):
        env = generate(13, 15, 15, Difficulty.MEDIUM)
        for r in range(15):
            for c in range(15):
                if env.cell(r, c) == CellType.OBSTACLE:
                    continue
                path = astar_path(env, (r, c))
                if path is None:
                    continue
                assert path[0] == (r, c)
                assert env.cell(*path[-1]) == CellType.STATION
                for (r1, c1), (r2, c2) in zip(path, path[1:]):
                    assert chebyshev((r1, c1), (r2, c2)) == 1
                    assert env.cell(r2, c2) != CellType.OBSTACLE

    def test_optimal_on_seeded_environments(self):
        for seed, difficulty in [(0, Difficulty.EASY), (1, Difficulty.MEDIUM), (2, Difficulty.HARD)]:
            env = generate(seed, 12, 12, difficulty)
            dist = bfs_station_distances(env)
            for r in range(12):
                for c in range(12):
                    if env.cell(r, c) == CellType.OBSTACLE:
                        continue
                    path = astar_path(env, (r, c))
                    got = None if path is None else len(path) - 1
                    assert got == dist.get((r, c))

    def test_deterministic_paths(self):
        env = generate(17, 15, 15, Difficulty.MEDIUM)
        start = next((r, c) for r in range(15) for c in range(15)
                     if env.cell(r, c) == CellType.FREE)
        for _ in range(3):
            assert astar_path(env, start) == astar_path(env, start)

    def test_heuristic_admissible(self):
        env = generate(23, 15, 15, Difficulty.EASY)
        dist = bfs_station_distances(env)
        stations = env.station_positions()
        for cell, true_dist in dist.items():
            assert min(chebyshev(cell, s) for s in stations) <= true_dist


class TestPlanAll:
    def test_all_station_grid(self):
        env = grid_from_text("CC\nCC")
        table = plan_all(env)
        assert len(table) == 4
        assert all(len(table.get((r, c))) == 1 for r in range(2) for c in range(2))

    def test_lengths_match_per_cell_astar(self):
        env = generate(29, 20, 20, Difficulty.MEDIUM)
        table = plan_all(env)
        for r in range(20):
            for c in range(20):
                if env.cell(r, c) == CellType.OBSTACLE:
                    continue
                independent = astar_path(env, (r, c))
                stored = table.get((r, c))
                if independent is None:
                    assert stored is None
                else:
                    assert stored is not None
                    assert len(stored) == len(independent)

    def test_no_station_grid_is_empty(self):
        env = grid_from_text("..\n..")
        assert len(plan_all(env)) == 0

    def test_stored_paths_valid(self):
        env = generate(31, 18, 18, Difficulty.HARD)
        table = plan_all(env)
        for path in table.paths.values():
            assert path_is_valid(path, env)


class TestStaticEvaluate:
    def test_unchanged_environment_keeps_rate(self):
        env = generate(37, 15, 15, Difficulty.MEDIUM)
        table, rate0 = oracle_step(env)
        assert static_evaluate(table, env) == rate0

    def test_blocking_obstacle_invalidates_path(self):
        env = grid_from_text("....C")
        table = plan_all(env)
        assert static_evaluate(table, env) == 1.0
        # (0,0) and (0,1) lose their stored route through (0,2)
        blocked = grid_from_text("..#.C")
        assert static_evaluate(table, blocked) == pytest.approx(2 / 4)

    def test_empty_table_scores_zero(self):
        env = grid_from_text("..\n.C")
        assert static_evaluate(PathTable(2, 2, {}), env) == 0.0

    def test_rate_degrades_over_changes(self):
        env = generate(41, 20, 20, Difficulty.HARD)
        table, rate0 = oracle_step(env)
        rng = make_rng(2)
        current = env
        for _ in range(30):
            current, _ = apply_changes(current, rng, 2)
        assert static_evaluate(table, current) < rate0


class TestOracleStep:
    def test_open_grid_with_station_scores_one(self):
        env = grid_from_text("...\n.C.\n...")
        _, rate = oracle_step(env)
        assert rate == 1.0

    def test_matches_bfs_reachability(self):
        for seed in (3, 4, 5):
            env = generate(seed, 20, 20, Difficulty.EASY)
            _, rate = oracle_step(env)
            assert rate == bfs_reachable_fraction(env)

    def test_no_station_grid_scores_zero(self):
        env = grid_from_text("..\n#.")
        _, rate = oracle_step(env)
        assert rate == 0.0

    def test_walled_station_reaches_only_itself(self):
        env = grid_from_text(
            """
            .####
            .#C#.
            .####
            """
        )
        _, rate = oracle_step(env)
        # the station's own zero-length path is the single success
        assert rate == pytest.approx(1 / 5)
