"""Exception hierarchy shared across the package.

Everything raised deliberately by gbnlearn derives from
:class:`GbnLearnError`, so callers (and the CLI) can separate expected
numerical/validation failures from genuine bugs.
"""

from __future__ import annotations


class GbnLearnError(Exception):
    """Base class for all gbnlearn errors."""


class DimensionMismatch(GbnLearnError):
    """Operand shapes are inconsistent."""


class NotSymmetric(GbnLearnError):
    """A matrix required to be symmetric is not (beyond tolerance)."""


class NotPositiveDefinite(GbnLearnError):
    """Cholesky pivot fell below tolerance.

    ``pivot_index`` is the 0-based index of the failing pivot.
    """

    def __init__(self, message: str, pivot_index: int = -1):
        super().__init__(message)
        self.pivot_index = pivot_index


class SingularModel(GbnLearnError):
    """Model moments are numerically singular (corrupted input guard)."""


class NotTerminal(GbnLearnError):
    """Vertex removal was requested for a node that has children."""


class ScreeningExhausted(GbnLearnError):
    """Generator rejection loop hit its retry budget."""


class LpError(GbnLearnError):
    """Base class for linear-program solver failures."""


class Infeasible(LpError):
    """The LP has no feasible point (phase-1 optimum stayed positive)."""


class Unbounded(LpError):
    """The LP objective is unbounded below."""


class IterationLimit(LpError):
    """An iterative routine exhausted its iteration budget."""


class SingularSupport(GbnLearnError):
    """The support submatrix of a regression is numerically singular."""

    def __init__(self, message: str, pivot_index: int = -1):
        super().__init__(message)
        self.pivot_index = pivot_index


class EmptySupport(GbnLearnError):
    """Raised only where an empty support is disallowed by the caller."""


class NonpositivePivot(GbnLearnError):
    """A peeling step met a non-positive diagonal precision entry."""


class PipelineError(GbnLearnError):
    """Wraps a failure inside the end-to-end learner with its stage name."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage


class DataFormatError(GbnLearnError):
    """A data or model file does not parse."""


class ConfigError(GbnLearnError):
    """A configuration file or CLI argument set is invalid."""
