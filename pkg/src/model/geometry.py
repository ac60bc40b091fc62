"""
Scenario geometry shared by the system model and the channel generator.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Sequence, Tuple

from src.errors import StructuralError

Point = Tuple[float, float, float]


def _as_point(value: Sequence[float], name: str) -> Point:
    point = tuple(float(v) for v in value)
    if len(point) != 3:
        raise StructuralError(f"{name} must have 3 coordinates, got {len(point)}")
    if not all(math.isfinite(v) for v in point):
        raise StructuralError(f"{name} has non-finite coordinates: {point}")
    return point  # type: ignore[return-value]


@dataclass(frozen=True)
class Geometry:
    """
    Positions of the BS, the RISs and the users, in meters.

    The user region is an axis-aligned box given by its (min, max) corners;
    `user_pos` stays None until users are placed.
    """
    bs_pos: Point
    ris_pos: Tuple[Point, ...]
    user_region: Tuple[Point, Point]
    user_pos: Optional[Tuple[Point, ...]] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "bs_pos", _as_point(self.bs_pos, "bs_pos"))
        object.__setattr__(self, "ris_pos", tuple(
            _as_point(p, f"ris_pos[{i}]") for i, p in enumerate(self.ris_pos)
        ))
        if len(self.user_region) != 2:
            raise StructuralError("user_region must be a (min, max) pair of corners")
        low = _as_point(self.user_region[0], "user_region[0]")
        high = _as_point(self.user_region[1], "user_region[1]")
        if any(lo > hi for lo, hi in zip(low, high)):
            raise StructuralError(f"user_region min {low} exceeds max {high}")
        object.__setattr__(self, "user_region", (low, high))
        if self.user_pos is not None:
            object.__setattr__(self, "user_pos", tuple(
                _as_point(p, f"user_pos[{i}]") for i, p in enumerate(self.user_pos)
            ))

    @property
    def num_ris(self) -> int:
        return len(self.ris_pos)

    def with_users(self, positions: Sequence[Sequence[float]]) -> "Geometry":
        """Return a copy with user positions filled in."""
        return replace(self, user_pos=tuple(tuple(p) for p in positions))

    def restrict(self, subset: Sequence[int]) -> "Geometry":
        """Return a copy keeping only the RISs listed in `subset`."""
        return replace(self, ris_pos=tuple(self.ris_pos[l] for l in subset))

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "bs_pos": list(self.bs_pos),
            "ris_pos": [list(p) for p in self.ris_pos],
            "user_region": [list(self.user_region[0]), list(self.user_region[1])],
        }
        if self.user_pos is not None:
            data["user_pos"] = [list(p) for p in self.user_pos]
        return data
