"""
SVG plots of result and training logs.

Result logs (``variant,shots,seed,accuracy,ci95``) are grouped by sweep key:
rows labelled ``<key>=<value>`` give one accuracy-vs-value curve per key, one
line per shot count; plain variant names give the ablation bar chart.
Training logs (``episode,loss,omega,loss_total,accuracy``) give a loss curve.
Every figure is written next to the CSV it was drawn from.

All logs are parsed and checked before any file is written.
"""

from collections import defaultdict
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from salnet.config.constants import ABLATION_VARIANTS, RESULT_COLUMNS, TRAIN_LOG_COLUMNS  # noqa: E402
from salnet.harness.metrics import read_rows, write_rows  # noqa: E402
from salnet.shared.exceptions import DataError  # noqa: E402
from salnet.shared.logger import get_logger  # noqa: E402

logger = get_logger(__name__)

plt.rcParams["svg.hashsalt"] = "salnet"
SMOOTHING_WINDOW = 50


def _floats(rows: List[Dict[str, Any]], column: str, source: Path) -> np.ndarray:
    try:
        return np.array([float(row[column]) for row in rows], dtype=np.float64)
    except ValueError as e:
        raise DataError("Non-numeric value in metrics log", details={"path": str(source), "column": column}, original_error=e) from e


def _load(path: Path) -> Tuple[str, List[Dict[str, Any]]]:
    rows = read_rows(path)
    if not rows:
        raise DataError("Metrics log has no rows", details={"path": str(path)})
    header = set(rows[0])
    if set(RESULT_COLUMNS) <= header:
        return "result", rows
    if set(TRAIN_LOG_COLUMNS) <= header:
        return "train", rows
    raise DataError("Unrecognized metrics log", details={"path": str(path), "header": sorted(header)})


def _save(fig: "plt.Figure", path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return path


def _as_number(text: str) -> float | None:
    try:
        return float(text)
    except ValueError:
        return None


def _mean_rows(rows: List[Dict[str, Any]], source: Path) -> List[Dict[str, Any]]:
    """Average accuracy and ci95 over seeds per (variant, shots), preserving first-seen order."""
    shots = _floats(rows, "shots", source).astype(int)
    groups: Dict[Tuple[str, int], List[Dict[str, Any]]] = defaultdict(list)
    for row, count in zip(rows, shots):
        groups[(row["variant"], int(count))].append(row)
    merged = []
    for (variant, count), members in groups.items():
        merged.append(
            {
                "variant": variant,
                "shots": count,
                "seed": ",".join(str(m["seed"]) for m in members),
                "accuracy": float(np.mean(_floats(members, "accuracy", source))),
                "ci95": float(np.mean(_floats(members, "ci95", source))),
            }
        )
    return merged


def plot_sweep(key: str, rows: List[Dict[str, Any]], out_dir: Path) -> List[Path]:
    values = [row["variant"].split("=", 1)[1] for row in rows]
    numeric = all(_as_number(v) is not None for v in values)
    categories = list(dict.fromkeys(values))

    fig, ax = plt.subplots(figsize=(6, 4))
    for shots in sorted({row["shots"] for row in rows}):
        picked = [(v, row) for v, row in zip(values, rows) if row["shots"] == shots]
        if numeric:
            picked.sort(key=lambda item: float(item[0]))
            x = [float(v) for v, _ in picked]
        else:
            x = [categories.index(v) for v, _ in picked]
        ax.errorbar(
            x,
            [row["accuracy"] for _, row in picked],
            yerr=[row["ci95"] for _, row in picked],
            marker="o",
            capsize=3,
            label=f"{shots}-shot",
        )
    if not numeric:
        ax.set_xticks(range(len(categories)), categories)
    ax.set_xlabel(key)
    ax.set_ylabel("accuracy (%)")
    ax.set_title(f"accuracy vs {key}")
    ax.grid(alpha=0.3)
    ax.legend()

    stem = "sweep_" + "".join(ch if ch.isalnum() else "_" for ch in key)
    return [
        _save(fig, out_dir / f"{stem}.svg"),
        write_rows(out_dir / f"{stem}.csv", rows, RESULT_COLUMNS),
    ]


def plot_ablation(rows: List[Dict[str, Any]], out_dir: Path) -> List[Path]:
    order = {name: i for i, name in enumerate(ABLATION_VARIANTS)}
    variants = sorted({row["variant"] for row in rows}, key=lambda n: (order.get(n, len(order)), n))
    shot_values = sorted({row["shots"] for row in rows})
    width = 0.8 / len(shot_values)

    fig, ax = plt.subplots(figsize=(max(6, 1.1 * len(variants)), 4))
    for j, shots in enumerate(shot_values):
        by_variant = {row["variant"]: row for row in rows if row["shots"] == shots}
        x = np.arange(len(variants)) + (j - (len(shot_values) - 1) / 2) * width
        ax.bar(
            x,
            [by_variant[v]["accuracy"] if v in by_variant else 0.0 for v in variants],
            width,
            yerr=[by_variant[v]["ci95"] if v in by_variant else 0.0 for v in variants],
            capsize=2,
            label=f"{shots}-shot",
        )
    ax.set_xticks(range(len(variants)), variants, rotation=30, ha="right")
    ax.set_ylabel("accuracy (%)")
    ax.set_title("ablation")
    ax.grid(axis="y", alpha=0.3)
    ax.legend()
    return [
        _save(fig, out_dir / "ablation.svg"),
        write_rows(out_dir / "ablation.csv", rows, RESULT_COLUMNS),
    ]


def _smooth(values: np.ndarray, window: int) -> np.ndarray:
    window = max(1, min(window, len(values)))
    kernel = np.ones(window) / window
    return np.convolve(values, kernel, mode="valid")


def plot_training(name: str, rows: List[Dict[str, Any]], source: Path, out_dir: Path) -> List[Path]:
    episode = _floats(rows, "episode", source)
    loss = _floats(rows, "loss", source)
    omega = _floats(rows, "omega", source)
    total = _floats(rows, "loss_total", source)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(episode, total, color="tab:blue", alpha=0.25, linewidth=0.8, label="L' per episode")
    smoothed = _smooth(total, SMOOTHING_WINDOW)
    ax.plot(episode[len(episode) - len(smoothed) :], smoothed, color="tab:blue", label="L' (moving mean)")
    ax.plot(episode[len(episode) - len(smoothed) :], _smooth(loss, SMOOTHING_WINDOW), color="tab:orange", label="L")
    if np.any(omega != 0):
        ax.plot(episode[len(episode) - len(smoothed) :], _smooth(omega, SMOOTHING_WINDOW), color="tab:green", label="Omega")
    ax.set_xlabel("episode")
    ax.set_ylabel("loss")
    ax.set_title(f"training loss: {name}")
    ax.grid(alpha=0.3)
    ax.legend()

    parsed = [{column: row[column] for column in TRAIN_LOG_COLUMNS} for row in rows]
    return [
        _save(fig, out_dir / f"loss_{name}.svg"),
        write_rows(out_dir / f"loss_{name}.csv", parsed, TRAIN_LOG_COLUMNS),
    ]


def _log_name(path: Path) -> str:
    """Run directory plus stem, e.g. ``wo_hal_train_log``."""
    parent = path.parent.name
    return f"{parent}_{path.stem}" if parent else path.stem


def emit_plots(logs: Sequence[Path], out_dir: Path) -> List[Path]:
    """
    Render every log in ``logs`` into ``out_dir``; returns the written files.

    Raises:
        DataError: no logs, an empty or unrecognized log, or a non-numeric value
        UnreadableFileError: a log cannot be read
    """
    if not logs:
        raise DataError("No metrics logs to plot")
    out_dir = Path(out_dir)

    results: List[Dict[str, Any]] = []
    trainings: List[Tuple[Path, List[Dict[str, Any]]]] = []
    for path in map(Path, logs):
        kind, rows = _load(path)
        if kind == "result":
            results.extend(_mean_rows(rows, path))
        else:
            for column in TRAIN_LOG_COLUMNS:
                _floats(rows, column, path)
            trainings.append((path, rows))

    sweeps: Dict[str, List[Dict[str, Any]]] = defaultdict(list)
    ablation: List[Dict[str, Any]] = []
    for row in results:
        key, sep, _ = row["variant"].partition("=")
        if sep:
            sweeps[key].append(row)
        else:
            ablation.append(row)

    written: List[Path] = []
    for key, rows in sweeps.items():
        written.extend(plot_sweep(key, rows, out_dir))
    if ablation:
        written.extend(plot_ablation(ablation, out_dir))
    for path, rows in trainings:
        written.extend(plot_training(_log_name(path), rows, path, out_dir))
    logger.info("Plots written", out_dir=str(out_dir), files=len(written))
    return written
