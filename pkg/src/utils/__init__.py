"""
Utilities for the RIS green network simulator.

This package contains defaults, environment settings, unit conversions and
the scenario file loader.
"""

from src.utils.conversion_utils import (
    db_to_linear,
    dbm_to_mw,
    mw_to_dbm,
    format_power
)
