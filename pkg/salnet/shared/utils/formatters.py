"""
Text and data formatting utilities.
"""

import csv
from enum import Enum
from io import StringIO
from typing import Any, Dict, Iterable, Sequence


def format_value(value: Any) -> str:
    """
    Render one config or CSV value.

    Floats use ``repr`` so they parse back to the same double; sequences are
    comma-joined; ``None`` is empty.

    Examples:
        >>> format_value(0.1)
        '0.1'
        >>> format_value([1.0, 2.5])
        '1.0,2.5'
    """
    if value is None:
        return ""
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(item) for item in value)
    return str(value)


def format_key_value(values: Dict[str, Any]) -> str:
    """
    Format a flat mapping as ``key=value`` lines.

    Examples:
        >>> format_key_value({"n_way": 5, "prior.mode": "ssp"})
        'n_way=5\\nprior.mode=ssp\\n'
    """
    return "".join(f"{key}={format_value(value)}\n" for key, value in values.items())


def format_csv(rows: Iterable[Dict[str, Any]], columns: Sequence[str]) -> str:
    """
    Format rows as CSV text with a header row, in the given column order.

    Examples:
        >>> format_csv([{"variant": "w/o Hal.", "shots": 1}], ["variant", "shots"])
        'variant,shots\\nw/o Hal.,1\\n'
    """
    buffer = StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(column)) for column in columns])
    return buffer.getvalue()


def format_accuracy(mean: float, ci95: float) -> str:
    """
    Examples:
        >>> format_accuracy(57.4512, 0.8791)
        '57.45 ± 0.88'
    """
    return f"{mean:.2f} ± {ci95:.2f}"


__all__ = [
    "format_value",
    "format_key_value",
    "format_csv",
    "format_accuracy",
]
