"""
Data parsing utilities.
"""

import csv
from io import StringIO
from typing import Any, Dict, List

from salnet.shared.exceptions import ConfigurationError, DataError


def parse_key_value(text: str, source: str = "<string>") -> Dict[str, str]:
    """
    Parse flat ``key=value`` text.

    One key per line; blank lines and ``#`` comments are ignored; whitespace
    around keys and values is stripped.

    Raises:
        ConfigurationError: A line has no ``=``, an empty key, or a key repeats

    Examples:
        >>> parse_key_value("n_way = 5\\n# comment\\nprior.mode=ssp")
        {'n_way': '5', 'prior.mode': 'ssp'}
    """
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigurationError(
                "Malformed config line", details={"source": source, "line": lineno, "text": raw.strip()}
            )
        if key in values:
            raise ConfigurationError("Duplicate config key", details={"source": source, "line": lineno, "key": key})
        values[key] = value.strip()
    return values


def parse_list(text: str) -> List[str]:
    """
    Split a comma-separated value, dropping empty items.

    Examples:
        >>> parse_list("1.0, 2.5")
        ['1.0', '2.5']
        >>> parse_list("")
        []
    """
    return [item.strip() for item in text.split(",") if item.strip()]


def parse_csv(text: str, required: tuple[str, ...] = ()) -> List[Dict[str, Any]]:
    """
    Parse CSV text with a mandatory header row into a list of dicts.

    Raises:
        DataError: The header is missing, lacks a required column, or a row is ragged

    Examples:
        >>> parse_csv('episode,loss\\n1,0.2')
        [{'episode': '1', 'loss': '0.2'}]
    """
    if not text or not text.strip():
        raise DataError("CSV is empty")
    try:
        reader = csv.DictReader(StringIO(text))
        header = reader.fieldnames or []
        missing = [column for column in required if column not in header]
        if missing:
            raise DataError("CSV lacks required columns", details={"missing": missing, "header": header})
        rows = list(reader)
    except csv.Error as e:
        raise DataError(f"Invalid CSV: {e}", original_error=e) from e
    for row in rows:
        if None in row or any(value is None for value in row.values()):
            raise DataError("Ragged CSV row", details={"row": row})
    return rows


__all__ = [
    "parse_key_value",
    "parse_list",
    "parse_csv",
]
