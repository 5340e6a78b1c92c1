"""
Common utilities used across the package.
"""

from salnet.shared.utils.formatters import (
    format_accuracy,
    format_csv,
    format_key_value,
    format_value,
)
from salnet.shared.utils.parsers import parse_csv, parse_key_value, parse_list

__all__ = [
    # Formatters
    "format_value",
    "format_key_value",
    "format_csv",
    "format_accuracy",
    # Parsers
    "parse_key_value",
    "parse_list",
    "parse_csv",
]
