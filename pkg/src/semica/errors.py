"""Exception types shared across the package."""

from __future__ import annotations


class SemicaError(Exception):
    """Base class for all semica-specific errors."""


class CycleDetected(SemicaError):
    """A directed cycle was found where a DAG was required."""

    def __init__(self, cycle: list[int]):
        self.cycle = list(cycle)
        pretty = " -> ".join(f"V{v + 1}" for v in self.cycle + self.cycle[:1])
        super().__init__(f"directed cycle: {pretty}")


class NotAPath(SemicaError):
    """A vertex sequence contains a consecutive pair that is not an edge."""


class IllConditioned(SemicaError):
    """A linear solve was rejected because the matrix is near-singular."""


class ObservedColumnsDependent(SemicaError):
    """Two observed-noise mixing columns are linearly dependent.

    On exact inputs this signals a faithfulness violation: observed columns
    are provably independent for faithful models.
    """


class NotAbsorbable(SemicaError):
    """The requested absorb action violates the graphical conditions."""


class DegenerateCovariance(SemicaError):
    """Sample covariance is rank deficient along a named direction."""

    def __init__(self, message: str, direction=None):
        self.direction = direction
        super().__init__(message)


class AmbiguousColumn(SemicaError):
    """More than one mixing column matches an observed descendant pattern.

    Raised when the unique-effect conditions fail empirically; callers may
    fall back to enumerating all candidate effect matrices.
    """


class NoMatchingColumn(SemicaError):
    """No mixing column matches some observed variable's descendant pattern."""


class InconsistentVerdicts(SemicaError):
    """Pairwise path verdicts imply a directed cycle (finite-sample artifact)."""

    def __init__(self, cycle: list[int]):
        self.cycle = list(cycle)
        pretty = " -> ".join(f"V{v + 1}" for v in self.cycle + self.cycle[:1])
        super().__init__(
            f"path verdicts imply a cycle: {pretty}; rerun with break_cycles "
            "to drop the weakest verdicts"
        )


class StructureUnsupported(SemicaError):
    """The graph does not satisfy the equivalent-model construction's preconditions."""


class NonPositivePrice(SemicaError):
    """Price series must be strictly positive to compute returns."""
