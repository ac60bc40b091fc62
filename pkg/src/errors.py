"""
Exception hierarchy for the RIS green network simulator.

Solver statuses are plain values; the layers above the conic kernel turn them
into these exceptions where a subproblem has to be abandoned.
"""

from dataclasses import dataclass
from typing import List, Optional


class RisModelError(Exception):
    """Base class for all simulator errors."""


class StructuralError(RisModelError, ValueError):
    """Dimensions or value-object invariants do not match."""


class InfeasibleError(RisModelError):
    """The SINR targets cannot be met with the given configuration."""


class NumericalLimitError(RisModelError):
    """The conic solver stopped without a certified answer."""


@dataclass(frozen=True)
class ConfigIssue:
    """One problem found in a scenario file, located by its JSON path."""
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


class ConfigError(RisModelError, ValueError):
    """A scenario file could not be turned into a valid SystemConfig."""

    def __init__(self, issues: List[ConfigIssue], message: Optional[str] = None):
        self.issues = list(issues)
        if message is None:
            message = "; ".join(str(issue) for issue in self.issues) or "invalid configuration"
        super().__init__(message)
