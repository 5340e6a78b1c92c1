"""
Result types and CSV persistence for metric logs.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence

import numpy as np

from salnet.config.constants import CI95_Z
from salnet.shared.exceptions import UnreadableFileError
from salnet.shared.utils.formatters import format_accuracy, format_csv
from salnet.shared.utils.parsers import parse_csv


def ci95(values: Sequence[float]) -> float:
    """``1.96 * sample_std / sqrt(E)``; zero for fewer than two values."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        return 0.0
    return float(CI95_Z * values.std(ddof=1) / np.sqrt(values.size))


@dataclass(frozen=True)
class EvalResult:
    """Accuracy in percent over evaluation episodes."""

    mean_accuracy: float
    ci95: float
    per_episode: tuple[float, ...] = field(default_factory=tuple)

    @classmethod
    def from_episodes(cls, accuracies: Sequence[float]) -> "EvalResult":
        percent = [100.0 * float(a) for a in accuracies]
        return cls(mean_accuracy=float(np.mean(percent)), ci95=ci95(percent), per_episode=tuple(percent))

    def __str__(self) -> str:
        return format_accuracy(self.mean_accuracy, self.ci95)


def write_rows(path: Path, rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_csv(rows, columns), encoding="utf-8")
    return path


def read_rows(path: Path, required: Sequence[str] = ()) -> List[Dict[str, Any]]:
    """
    Raises:
        UnreadableFileError: the file cannot be read
        DataError: the CSV is empty, malformed, or lacks required columns
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise UnreadableFileError("Cannot read metrics log", path=str(path), original_error=e) from e
    return parse_csv(text, tuple(required))
