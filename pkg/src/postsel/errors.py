"""Exception types shared across the package.

Every failure mode that callers are expected to handle gets its own class.
Plain ValueError/AssertionError are reserved for programming errors.
"""


class PostselError(Exception):
    """Base class for all package-specific errors."""


class CapacityError(PostselError):
    """A request exceeds a hard resource limit (qubit count, family size)."""


class DomainError(PostselError):
    """An input lies outside the mathematically supported domain."""


class DegreeOverflowError(PostselError):
    """A polynomial has support on subsets larger than the compiled degree."""


class PostselectionImpossible(PostselError):
    """The postselection event has (numerically) zero probability."""


class TheoremViolation(PostselError):
    """An invariant guaranteed by the underlying theory failed to hold.

    Raised when a cross-check that should be exact (up to float noise)
    disagrees, which indicates a bug rather than bad input.
    """


class NumericalUnderflow(PostselError):
    """A computation lost all significance and cannot return a safe value."""


class StageFailure(PostselError):
    """A multi-stage pipeline failed; records which stage broke."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


class SimplexStall(PostselError):
    """The exact LP solver hit its iteration cap without concluding."""
