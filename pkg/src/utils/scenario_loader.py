"""
Scenario files for the RIS green network simulator.

A scenario is a JSON object; every key is optional and falls back to the
evaluation-setup default in parameters.py. Power and noise values may be
numbers in mW or strings such as "-40 dBm". Exactly one of `gamma` (linear
SINR) or `rate` (bits per channel use) may be given.

Every problem found is collected with its JSON path before anything is
raised, so one pass reports all of them.
"""

import json
import logging
import math
import os
import re
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from src.errors import ConfigError, ConfigIssue, StructuralError
from src.model.geometry import Geometry
from src.model.network_model import PathLossExponents, SystemConfig, rate_to_sinr
from src.utils.conversion_utils import parse_power_mw
from src.utils.parameters import (
    DEFAULT_BS_CIRCUIT_POWER_MW,
    DEFAULT_BS_POSITION,
    DEFAULT_DRAIN_EFFICIENCY,
    DEFAULT_ELEMENT_POWER_MW,
    DEFAULT_ELEMENTS_PER_RIS,
    DEFAULT_MAX_TRANSMIT_POWER_MW,
    DEFAULT_NOISE_DBM,
    DEFAULT_NUM_ANTENNAS,
    DEFAULT_NUM_RIS,
    DEFAULT_NUM_USERS,
    DEFAULT_PATHLOSS_EXPONENTS,
    DEFAULT_PATHLOSS_INTERCEPT_DB,
    DEFAULT_REFLECTION_AMPLITUDE,
    DEFAULT_RIS_POSITIONS,
    DEFAULT_TARGET_RATE,
    DEFAULT_USER_REGION,
)

logger = logging.getLogger(__name__)

TOP_LEVEL_KEYS = (
    "M", "K", "L", "N", "eta", "P_max", "P_BS", "P_RE", "rho", "sigma2",
    "gamma", "rate", "geometry", "pathloss_exponents", "pathloss_intercept_dB",
)
GEOMETRY_KEYS = ("bs_pos", "ris_pos", "user_region")
EXPONENT_KEYS = ("bs_ris", "ris_user", "bs_user")

_DB_RATIO = re.compile(r"^\s*([+-]?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*(dB)?\s*$")


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


class _Reader:
    """Collects issues and defaulted fields while reading one scenario object."""

    def __init__(self, data: Mapping[str, Any]):
        self.data = data
        self.issues: List[ConfigIssue] = []
        self.defaulted: List[str] = []

    def fail(self, path: str, message: str) -> None:
        self.issues.append(ConfigIssue(path, message))

    def get(self, key: str, default: Any) -> Any:
        if key not in self.data:
            self.defaulted.append(key)
            return default
        return self.data[key]

    def integer(self, key: str, default: int, minimum: int) -> Optional[int]:
        value = self.get(key, default)
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(key, f"expected an integer, got {value!r}")
            return None
        if value < minimum:
            self.fail(key, f"must be >= {minimum}, got {value}")
            return None
        return value

    def number(self, key: str, default: float, low: float = -math.inf, high: float = math.inf,
               low_open: bool = False) -> Optional[float]:
        value = self.get(key, default)
        return self.check_number(key, value, low, high, low_open)

    def check_number(self, path: str, value: Any, low: float = -math.inf, high: float = math.inf,
                     low_open: bool = False) -> Optional[float]:
        if not _is_number(value):
            self.fail(path, f"expected a number, got {value!r}")
            return None
        value = float(value)
        if value < low or (low_open and value == low) or value > high:
            left = "(" if low_open else "["
            self.fail(path, f"must lie in {left}{low}, {high}], got {value}")
            return None
        return value

    def power(self, path: str, value: Any, positive: bool = False) -> Optional[float]:
        try:
            power = parse_power_mw(value)
        except ValueError as exc:
            self.fail(path, str(exc))
            return None
        if not math.isfinite(power) or power < 0 or (positive and power == 0):
            bound = "positive" if positive else "nonnegative"
            self.fail(path, f"must be {bound}, got {value!r}")
            return None
        return power

    def per_item(self, key: str, default: Any, count: Optional[int], parse) -> Optional[Tuple]:
        """Scalar broadcast to `count` items, or a list of exactly `count` items."""
        value = self.get(key, default)
        if isinstance(value, list):
            if count is not None and len(value) != count:
                self.fail(key, f"expected {count} entries, got {len(value)}")
                return None
            parsed = [parse(f"{key}[{i}]", item) for i, item in enumerate(value)]
        else:
            if count is None:
                return None
            parsed = [parse(key, value)] * count
        if any(item is None for item in parsed):
            return None
        return tuple(parsed)

    def point(self, path: str, value: Any) -> Optional[Tuple[float, float, float]]:
        if not isinstance(value, list) or len(value) != 3:
            self.fail(path, f"expected [x, y, z], got {value!r}")
            return None
        coords = [self.check_number(f"{path}[{i}]", v) for i, v in enumerate(value)]
        if any(c is None for c in coords):
            return None
        return tuple(coords)  # type: ignore[return-value]

    def unknown_keys(self, obj: Mapping[str, Any], allowed: Tuple[str, ...], prefix: str = "") -> None:
        for key in obj:
            if key not in allowed:
                self.fail(f"{prefix}{key}", "unknown key")


def _read_intercept(reader: _Reader) -> Optional[float]:
    value = reader.get("pathloss_intercept_dB", DEFAULT_PATHLOSS_INTERCEPT_DB)
    if isinstance(value, str):
        match = _DB_RATIO.match(value.replace("−", "-"))
        if match is None:
            reader.fail("pathloss_intercept_dB", f"cannot parse dB value {value!r}")
            return None
        return float(match.group(1))
    return reader.check_number("pathloss_intercept_dB", value)


def _read_geometry(reader: _Reader, L: Optional[int]) -> Optional[Geometry]:
    raw = reader.get("geometry", {})
    if not isinstance(raw, dict):
        reader.fail("geometry", f"expected an object, got {type(raw).__name__}")
        return None
    reader.unknown_keys(raw, GEOMETRY_KEYS, "geometry.")

    if "bs_pos" in raw:
        bs_pos = reader.point("geometry.bs_pos", raw["bs_pos"])
    else:
        reader.defaulted.append("geometry.bs_pos")
        bs_pos = DEFAULT_BS_POSITION

    ris_pos: Optional[List] = None
    if "ris_pos" in raw:
        value = raw["ris_pos"]
        if not isinstance(value, list):
            reader.fail("geometry.ris_pos", "expected a list of [x, y, z] points")
        else:
            points = [reader.point(f"geometry.ris_pos[{i}]", p) for i, p in enumerate(value)]
            if L is not None and len(points) != L:
                reader.fail("geometry.ris_pos", f"expected {L} positions (one per RIS), got {len(points)}")
            elif all(p is not None for p in points):
                ris_pos = points
    elif L is not None:
        if L > len(DEFAULT_RIS_POSITIONS):
            reader.fail("geometry.ris_pos", f"required when L > {len(DEFAULT_RIS_POSITIONS)}")
        else:
            reader.defaulted.append("geometry.ris_pos")
            ris_pos = list(DEFAULT_RIS_POSITIONS[:L])

    region = None
    if "user_region" in raw:
        value = raw["user_region"]
        if not isinstance(value, list) or len(value) != 2:
            reader.fail("geometry.user_region", "expected [[xmin, ymin, zmin], [xmax, ymax, zmax]]")
        else:
            low = reader.point("geometry.user_region[0]", value[0])
            high = reader.point("geometry.user_region[1]", value[1])
            if low is not None and high is not None:
                if any(a > b for a, b in zip(low, high)):
                    reader.fail("geometry.user_region", "min corner exceeds max corner")
                else:
                    region = (low, high)
    else:
        reader.defaulted.append("geometry.user_region")
        region = DEFAULT_USER_REGION

    if bs_pos is None or ris_pos is None or region is None:
        return None
    return Geometry(bs_pos=bs_pos, ris_pos=tuple(ris_pos), user_region=region)


def _read_exponents(reader: _Reader) -> Optional[PathLossExponents]:
    raw = reader.get("pathloss_exponents", {})
    if not isinstance(raw, dict):
        reader.fail("pathloss_exponents", f"expected an object, got {type(raw).__name__}")
        return None
    reader.unknown_keys(raw, EXPONENT_KEYS, "pathloss_exponents.")
    values = {}
    for key in EXPONENT_KEYS:
        if key not in raw:
            reader.defaulted.append(f"pathloss_exponents.{key}")
            values[key] = DEFAULT_PATHLOSS_EXPONENTS[key]
            continue
        values[key] = reader.check_number(f"pathloss_exponents.{key}", raw[key], 0.0, low_open=True)
    if any(v is None for v in values.values()):
        return None
    return PathLossExponents(**values)


def _read_targets(reader: _Reader, K: Optional[int]) -> Optional[Tuple[float, ...]]:
    has_gamma = "gamma" in reader.data
    has_rate = "rate" in reader.data
    if has_gamma and has_rate:
        reader.fail("gamma", "give exactly one of gamma or rate")
        return None

    def positive(path: str, value: Any) -> Optional[float]:
        return reader.check_number(path, value, 0.0, low_open=True)

    if has_gamma:
        return reader.per_item("gamma", None, K, positive)
    rates = reader.per_item("rate", DEFAULT_TARGET_RATE, K, positive)
    if rates is None:
        return None
    return tuple(rate_to_sinr(r) for r in rates)


def load_config_dict(data: Mapping[str, Any]) -> Tuple[SystemConfig, List[str]]:
    """
    Build a SystemConfig from a parsed scenario object.

    Args:
        data: Scenario object (the decoded JSON)

    Returns:
        (config, diagnostics) where diagnostics lists the defaulted fields

    Raises:
        ConfigError: With one ConfigIssue per problem found
    """
    if not isinstance(data, Mapping):
        raise ConfigError([ConfigIssue("$", f"expected a JSON object, got {type(data).__name__}")])

    reader = _Reader(data)
    reader.unknown_keys(data, TOP_LEVEL_KEYS)

    M = reader.integer("M", DEFAULT_NUM_ANTENNAS, 1)
    K = reader.integer("K", DEFAULT_NUM_USERS, 1)
    L = reader.integer("L", DEFAULT_NUM_RIS, 0)

    def elements(path: str, value: Any) -> Optional[int]:
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            reader.fail(path, f"expected an integer >= 1, got {value!r}")
            return None
        return value

    def amplitude(path: str, value: Any) -> Optional[float]:
        return reader.check_number(path, value, 0.0, 1.0, low_open=True)

    def noise(path: str, value: Any) -> Optional[float]:
        return reader.power(path, value, positive=True)

    N = reader.per_item("N", DEFAULT_ELEMENTS_PER_RIS, L, elements)
    eta = reader.number("eta", DEFAULT_DRAIN_EFFICIENCY, 0.0, 1.0, low_open=True)
    P_max = reader.power("P_max", reader.get("P_max", DEFAULT_MAX_TRANSMIT_POWER_MW))
    P_BS = reader.power("P_BS", reader.get("P_BS", DEFAULT_BS_CIRCUIT_POWER_MW))
    P_RE = reader.power("P_RE", reader.get("P_RE", DEFAULT_ELEMENT_POWER_MW))
    rho = reader.per_item("rho", DEFAULT_REFLECTION_AMPLITUDE, L, amplitude)
    sigma2 = reader.per_item("sigma2", f"{DEFAULT_NOISE_DBM} dBm", K, noise)
    gamma = _read_targets(reader, K)
    geometry = _read_geometry(reader, L)
    exponents = _read_exponents(reader)
    intercept = _read_intercept(reader)

    if reader.issues:
        raise ConfigError(reader.issues)

    try:
        config = SystemConfig(
            M=M, K=K, L=L, N=N, eta=eta, P_max=P_max, P_BS=P_BS, P_RE=P_RE,
            rho=rho, sigma2=sigma2, gamma=gamma, geometry=geometry,
            pathloss_exponents=exponents, pathloss_intercept_dB=intercept,
        )
    except StructuralError as exc:
        raise ConfigError([ConfigIssue("$", str(exc))]) from exc

    diagnostics = [f"{field} not given, using default" for field in reader.defaulted]
    return config, diagnostics


def validate_config(source: Union[str, os.PathLike, Mapping[str, Any]]) -> Tuple[SystemConfig, List[str]]:
    """
    Read and validate a scenario file.

    Args:
        source: Path to a JSON scenario file, or an already decoded object

    Returns:
        (config, diagnostics) where diagnostics lists every defaulted field

    Raises:
        ConfigError: Unknown keys, wrong types or violated invariants, each
            with its JSON path
        OSError: The file cannot be read
    """
    if isinstance(source, Mapping):
        return load_config_dict(source)
    with open(source, "r", encoding="utf-8") as handle:
        text = handle.read()
    if not text.strip():
        data: Any = {}
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError([ConfigIssue("$", f"invalid JSON at line {exc.lineno}: {exc.msg}")]) from exc
    config, diagnostics = load_config_dict(data)
    logger.debug("Loaded %s with %d defaulted fields", source, len(diagnostics))
    return config, diagnostics


def default_config() -> SystemConfig:
    """The evaluation-setup scenario."""
    return load_config_dict({})[0]


def config_to_dict(config: SystemConfig) -> Dict[str, Any]:
    """Scenario object that validate_config maps back to `config` (users unplaced)."""
    geometry = config.geometry.to_dict()
    geometry.pop("user_pos", None)
    return {
        "M": config.M,
        "K": config.K,
        "L": config.L,
        "N": list(config.N),
        "eta": config.eta,
        "P_max": config.P_max,
        "P_BS": config.P_BS,
        "P_RE": config.P_RE,
        "rho": list(config.rho),
        "sigma2": list(config.sigma2),
        "gamma": list(config.gamma),
        "geometry": geometry,
        "pathloss_exponents": {
            "bs_ris": config.pathloss_exponents.bs_ris,
            "ris_user": config.pathloss_exponents.ris_user,
            "bs_user": config.pathloss_exponents.bs_user,
        },
        "pathloss_intercept_dB": config.pathloss_intercept_dB,
    }
