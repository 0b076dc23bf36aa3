"""Exception hierarchy for the EMP inference package."""

from __future__ import annotations


class EmpError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(EmpError):
    """Invalid solver, generator or experiment configuration."""


# -----------------------------------------------------------------------------
# Model validation
# -----------------------------------------------------------------------------


class ModelError(EmpError):
    """Base class for pairwise model validation failures."""


class DimensionMismatch(ModelError):
    """Cost or marginal arrays do not match the topology."""


class IsolatedVertex(ModelError):
    """A vertex is not covered by any edge."""


class NonFiniteCost(ModelError):
    """A cost entry is NaN or infinite."""


class DuplicateEdge(ModelError):
    """An edge is repeated, a self-loop, or not stored as (i, j) with i < j."""


# -----------------------------------------------------------------------------
# Numerical
# -----------------------------------------------------------------------------


class ZeroMass(EmpError):
    """A block of the marginal vector lost all of its mass."""


class NonPositiveInput(EmpError):
    """An oracle input was not strictly positive."""


class NonPositiveDelta(EmpError):
    """A vertex gap must be strictly positive."""


class TheoryViolation(EmpError):
    """A runtime check of the convergence theory failed."""


# -----------------------------------------------------------------------------
# Enumeration / generation
# -----------------------------------------------------------------------------


class TooLarge(EmpError):
    """Exhaustive enumeration would exceed the evaluation guard."""


class ZeroGap(EmpError):
    """The best objective value is attained by more than one assignment."""


class Unrepairable(EmpError):
    """The degree cap makes it impossible to cover every vertex."""
