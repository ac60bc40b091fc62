"""
Utility functions for unit conversions and formatting.

Everything inside the optimiser works in linear milliwatts; these helpers are
only used at the configuration and reporting boundary.
"""

import math
import re
from typing import Union

_DB_STRING = re.compile(r"^\s*([+-]?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*(dBm|dB|mW)?\s*$")


def db_to_linear(value_db: float) -> float:
    """
    Convert a decibel ratio to a linear ratio.

    Args:
        value_db (float): Ratio in dB (e.g., -30)

    Returns:
        float: Linear ratio (e.g., 0.001)
    """
    return 10.0 ** (value_db / 10.0)


def dbm_to_mw(value_dbm: float) -> float:
    """Convert dBm to milliwatts."""
    return 10.0 ** (value_dbm / 10.0)


def mw_to_dbm(value_mw: float) -> float:
    """Convert milliwatts to dBm; zero maps to -inf."""
    if value_mw <= 0:
        return -math.inf
    return 10.0 * math.log10(value_mw)


def parse_power_mw(value: Union[int, float, str]) -> float:
    """
    Parse a power or noise value into linear milliwatts.

    Numbers are taken as mW. Strings may carry a "dBm" or "mW" suffix; a
    Unicode minus sign is accepted.

    Args:
        value: The configured value (e.g., 1000, "30 dBm", "−40 dBm")

    Returns:
        float: Linear power in mW

    Raises:
        ValueError: If the value cannot be parsed
    """
    if isinstance(value, bool):
        raise ValueError(f"expected a number or a dBm string, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValueError(f"expected a number or a dBm string, got {type(value).__name__}")

    match = _DB_STRING.match(value.replace("−", "-"))
    if match is None:
        raise ValueError(f"cannot parse power value {value!r}")
    number, unit = float(match.group(1)), match.group(2)
    if unit == "dBm":
        return dbm_to_mw(number)
    if unit == "dB":
        raise ValueError(f"power value {value!r} needs an absolute unit (dBm or mW)")
    return number


def format_power(value_mw: float) -> str:
    """
    Format a power value for reports.

    Args:
        value_mw (float): Power in mW

    Returns:
        str: Formatted string (e.g., "460.00 mW (26.63 dBm)")
    """
    if value_mw <= 0:
        return f"{value_mw:.2f} mW"
    return f"{value_mw:.2f} mW ({mw_to_dbm(value_mw):.2f} dBm)"
