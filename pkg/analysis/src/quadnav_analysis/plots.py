"""Turn results.csv / results_detailed.csv into static comparison figures.

One image per figure family and difficulty: success rate vs size, adaptation
time box plots, adaptation time and path length vs size, cumulative adaptation
curves, initial training time vs size, and per-time-step success curves.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

# timestamps and version stamps are stripped so re-renders are byte-identical
_SAVE_OPTS = {"dpi": 110, "metadata": {"Software": None}}

_SUMMARY_NUMERIC = {
    "size": False,
    "mean_success_rate": False,
    "mean_adaptation_seconds": False,
    "total_cumulative_adaptation_seconds": False,
    "mean_path_length": True,
    "initial_training_seconds": True,
}
_DETAILED_NUMERIC = {
    "size": False,
    "time_step": False,
    "success_rate": False,
    "adaptation_seconds": False,
    "cumulative_adaptation_seconds": False,
    "mean_path_length": True,
    "initial_training_seconds": True,
    "num_changes": False,
}


def _load(path: Path, numeric: dict[str, bool]) -> pd.DataFrame:
    """Read one CSV with row-accurate diagnostics; empty cells are allowed
    only in the optional columns."""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.ParserError as exc:
        raise ValueError(f"{path.name}: {exc}") from exc
    missing = set(numeric) - set(frame.columns)
    if missing:
        raise ValueError(f"{path.name}: missing columns {sorted(missing)}")
    for column, optional in numeric.items():
        raw = frame[column]
        converted = pd.to_numeric(raw.where(raw != "", None), errors="coerce")
        bad = converted.isna() & (raw != "")
        if not optional:
            bad |= raw == ""
        if bad.any():
            row = int(bad.idxmax()) + 2  # header is line 1
            raise ValueError(
                f"{path.name}: bad value {raw[bad.idxmax()]!r} in column "
                f"{column!r} at row {row}")
        frame[column] = converted
    return frame


def _approaches(frame: pd.DataFrame) -> list[str]:
    return list(dict.fromkeys(frame["approach"]))


def _vs_size_axes(ax, frame, column, ylabel):
    drawn = False
    for approach, group in _grouped(frame, column):
        ax.plot(group["size"], group[column], marker="o", label=approach)
        drawn = True
    ax.set_xlabel("environment size")
    ax.set_ylabel(ylabel)
    if drawn:
        ax.legend(fontsize=8)
    ax.grid(alpha=0.3)


def _grouped(frame, column):
    for approach in _approaches(frame):
        group = frame[frame["approach"] == approach].dropna(subset=[column])
        group = group.sort_values("size")
        if not group.empty:
            yield approach, group


def _success_rate_vs_size(summary, detailed, difficulty, out):
    fig, ax = plt.subplots(figsize=(7, 5))
    _vs_size_axes(ax, summary, "mean_success_rate", "mean success rate")
    ax.set_title(f"Success rate vs size ({difficulty})")
    fig.savefig(out / f"success_rate_vs_size_{difficulty}.png", **_SAVE_OPTS)
    plt.close(fig)
    return True


def _adaptation_box(summary, detailed, difficulty, out):
    steps = detailed[detailed["time_step"] > 0]
    if steps.empty:
        return False
    sizes = sorted(steps["size"].unique())
    fig, axes = plt.subplots(1, len(sizes), figsize=(4 + 3 * len(sizes), 5),
                             squeeze=False, sharey=True)
    for ax, size in zip(axes[0], sizes):
        subset = steps[steps["size"] == size]
        approaches = _approaches(subset)
        ax.boxplot([subset[subset["approach"] == a]["adaptation_seconds"]
                    for a in approaches], tick_labels=approaches)
        ax.set_title(f"{size}x{size}")
        ax.tick_params(axis="x", rotation=60, labelsize=7)
        ax.grid(alpha=0.3)
    axes[0][0].set_ylabel("adaptation seconds")
    fig.suptitle(f"Adaptation time per step ({difficulty})")
    fig.tight_layout()
    fig.savefig(out / f"adaptation_time_box_{difficulty}.png", **_SAVE_OPTS)
    plt.close(fig)
    return True


def _adaptation_and_path_length(summary, detailed, difficulty, out):
    fig, (left, right) = plt.subplots(1, 2, figsize=(12, 5))
    _vs_size_axes(left, summary, "mean_adaptation_seconds", "mean adaptation seconds")
    _vs_size_axes(right, summary, "mean_path_length", "mean path length")
    left.set_title(f"Adaptation time vs size ({difficulty})")
    right.set_title(f"Path length vs size ({difficulty})")
    fig.tight_layout()
    fig.savefig(out / f"adaptation_and_path_length_vs_size_{difficulty}.png", **_SAVE_OPTS)
    plt.close(fig)
    return True


def _cumulative_curves(summary, detailed, difficulty, out):
    steps = detailed.sort_values("time_step")
    sizes = sorted(steps["size"].unique())
    fig, axes = plt.subplots(1, len(sizes), figsize=(4 + 3 * len(sizes), 5),
                             squeeze=False)
    for ax, size in zip(axes[0], sizes):
        subset = steps[steps["size"] == size]
        for approach in _approaches(subset):
            series = subset[subset["approach"] == approach]
            ax.plot(series["time_step"], series["cumulative_adaptation_seconds"],
                    label=approach)
        ax.set_title(f"{size}x{size}")
        ax.set_xlabel("time step")
        ax.grid(alpha=0.3)
        ax.legend(fontsize=7)
    axes[0][0].set_ylabel("cumulative adaptation seconds")
    fig.suptitle(f"Cumulative adaptation time ({difficulty})")
    fig.tight_layout()
    fig.savefig(out / f"cumulative_adaptation_time_{difficulty}.png", **_SAVE_OPTS)
    plt.close(fig)
    return True


def _initial_training_vs_size(summary, detailed, difficulty, out):
    fig, ax = plt.subplots(figsize=(7, 5))
    _vs_size_axes(ax, summary, "initial_training_seconds", "initial training seconds")
    ax.set_title(f"Initial training time vs size ({difficulty})")
    fig.savefig(out / f"initial_training_time_vs_size_{difficulty}.png", **_SAVE_OPTS)
    plt.close(fig)
    return True


def _success_over_time(summary, detailed, difficulty, out):
    steps = detailed.sort_values("time_step")
    sizes = sorted(steps["size"].unique())
    fig, axes = plt.subplots(1, len(sizes), figsize=(4 + 3 * len(sizes), 5),
                             squeeze=False, sharey=True)
    for ax, size in zip(axes[0], sizes):
        subset = steps[steps["size"] == size]
        for approach in _approaches(subset):
            series = subset[subset["approach"] == approach]
            ax.plot(series["time_step"], series["success_rate"], label=approach)
        ax.set_title(f"{size}x{size}")
        ax.set_xlabel("time step")
        ax.set_ylim(0.0, 1.05)
        ax.grid(alpha=0.3)
        ax.legend(fontsize=7)
    axes[0][0].set_ylabel("success rate")
    fig.suptitle(f"Success rate over time ({difficulty})")
    fig.tight_layout()
    fig.savefig(out / f"success_rate_over_time_{difficulty}.png", **_SAVE_OPTS)
    plt.close(fig)
    return True


_FAMILIES = (
    _success_rate_vs_size,
    _adaptation_box,
    _adaptation_and_path_length,
    _cumulative_curves,
    _initial_training_vs_size,
    _success_over_time,
)


def render_all(results_dir: str | Path, plots_dir: str | Path) -> int:
    """Render every figure family for every difficulty present in the CSVs;
    returns the number of images written. Header-only inputs yield zero."""
    results_dir = Path(results_dir)
    plots_dir = Path(plots_dir)
    summary = _load(results_dir / "results.csv", _SUMMARY_NUMERIC)
    detailed = _load(results_dir / "results_detailed.csv", _DETAILED_NUMERIC)
    if summary.empty or detailed.empty:
        return 0
    plots_dir.mkdir(parents=True, exist_ok=True)
    difficulties = sorted(set(summary["difficulty"]) | set(detailed["difficulty"]))
    written = 0
    for difficulty in difficulties:
        summary_slice = summary[summary["difficulty"] == difficulty]
        detailed_slice = detailed[detailed["difficulty"] == difficulty]
        if summary_slice.empty or detailed_slice.empty:
            continue
        for family in _FAMILIES:
            if family(summary_slice, detailed_slice, difficulty, plots_dir):
                written += 1
    return written
