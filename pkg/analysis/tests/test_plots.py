import csv

import pytest

from quadnav_analysis import render_all
from quadnav_analysis.cli import main as cli_main

SUMMARY_HEADER = ["approach", "size", "difficulty", "mean_success_rate",
                  "mean_adaptation_seconds", "total_cumulative_adaptation_seconds",
                  "mean_path_length", "initial_training_seconds"]
DETAILED_HEADER = ["approach", "size", "difficulty", "time_step", "success_rate",
                   "adaptation_seconds", "cumulative_adaptation_seconds",
                   "mean_path_length", "initial_training_seconds", "num_changes"]

APPROACHES = ("astar-oracle", "fed-eqavg")


def write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def synth_results(results_dir, sizes=(20, 50), difficulty="hard", steps=4,
                  drop_path_lengths=False):
    results_dir.mkdir(parents=True, exist_ok=True)
    summary, detailed = [], []
    for approach in APPROACHES:
        for size in sizes:
            summary.append([approach, size, difficulty, "0.9", "0.01", "0.2",
                            "" if drop_path_lengths else "5.5", "0.1"])
            cumulative = 0.0
            for t in range(steps + 1):
                adaptation = 0.0 if t == 0 else 0.01
                cumulative += adaptation
                detailed.append([
                    approach, size, difficulty, t, f"{0.9 - 0.01 * t:.6f}",
                    f"{adaptation:.6f}", f"{cumulative:.6f}",
                    "" if drop_path_lengths else f"{5.0 + t:.6f}",
                    "0.1" if t == 0 else "", 0 if t == 0 else 1,
                ])
    write_rows(results_dir / "results.csv", SUMMARY_HEADER, summary)
    write_rows(results_dir / "results_detailed.csv", DETAILED_HEADER, detailed)


class TestRenderAll:
    def test_six_images_per_difficulty(self, tmp_path):
        synth_results(tmp_path / "results")
        count = render_all(tmp_path / "results", tmp_path / "plots")
        images = sorted(p.name for p in (tmp_path / "plots").glob("*.png"))
        assert count == 6
        assert len(images) == 6
        assert all(name.endswith("_hard.png") for name in images)

    def test_two_difficulties_double_the_images(self, tmp_path):
        results = tmp_path / "results"
        synth_results(results, difficulty="easy")
        # append a second difficulty to both files
        extra = tmp_path / "extra"
        synth_results(extra, difficulty="hard")
        for name in ("results.csv", "results_detailed.csv"):
            base = (results / name).read_text().splitlines()
            more = (extra / name).read_text().splitlines()[1:]
            (results / name).write_text("\n".join(base + more) + "\n")
        assert render_all(results, tmp_path / "plots") == 12

    def test_header_only_inputs_render_nothing(self, tmp_path):
        results = tmp_path / "results"
        results.mkdir()
        write_rows(results / "results.csv", SUMMARY_HEADER, [])
        write_rows(results / "results_detailed.csv", DETAILED_HEADER, [])
        assert render_all(results, tmp_path / "plots") == 0

    def test_missing_path_lengths_skipped_not_fatal(self, tmp_path):
        synth_results(tmp_path / "results", drop_path_lengths=True)
        assert render_all(tmp_path / "results", tmp_path / "plots") == 6

    def test_corrupt_numeric_cell_names_row(self, tmp_path):
        synth_results(tmp_path / "results")
        detailed = tmp_path / "results" / "results_detailed.csv"
        lines = detailed.read_text().splitlines()
        lines[3] = lines[3].replace("0.010000", "not-a-number", 1)
        detailed.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValueError, match="row 4"):
            render_all(tmp_path / "results", tmp_path / "plots")

    def test_missing_column_rejected(self, tmp_path):
        results = tmp_path / "results"
        results.mkdir()
        write_rows(results / "results.csv", SUMMARY_HEADER[:-1], [])
        write_rows(results / "results_detailed.csv", DETAILED_HEADER, [])
        with pytest.raises(ValueError, match="initial_training_seconds"):
            render_all(results, tmp_path / "plots")

    def test_rendering_is_deterministic(self, tmp_path):
        synth_results(tmp_path / "results")
        render_all(tmp_path / "results", tmp_path / "one")
        render_all(tmp_path / "results", tmp_path / "two")
        for first in sorted((tmp_path / "one").glob("*.png")):
            second = tmp_path / "two" / first.name
            assert first.read_bytes() == second.read_bytes()

    def test_inputs_left_untouched(self, tmp_path):
        synth_results(tmp_path / "results")
        before = {p.name: p.read_bytes() for p in (tmp_path / "results").iterdir()}
        render_all(tmp_path / "results", tmp_path / "plots")
        after = {p.name: p.read_bytes() for p in (tmp_path / "results").iterdir()}
        assert before == after


class TestCli:
    def test_smoke(self, tmp_path, capsys):
        synth_results(tmp_path / "results")
        code = cli_main([str(tmp_path / "results"), str(tmp_path / "plots")])
        assert code == 0
        assert "wrote 6 images" in capsys.readouterr().out

    def test_missing_input_fails(self, tmp_path, capsys):
        code = cli_main([str(tmp_path / "nowhere"), str(tmp_path / "plots")])
        assert code == 1
        assert "error:" in capsys.readouterr().err
