class DomainError(Exception):
    """Base class for all domain-level errors."""
    pass


class InvariantViolation(DomainError):
    """Raised when a domain invariant is violated."""
    pass


class ImageFormatError(DomainError):
    """Raised when an image file is not a canonical 8-bit P5 PGM."""
    pass


class DimensionMismatch(DomainError):
    """Raised when two grids that must be aligned have different shapes."""
    pass


class InfeasiblePayload(DomainError):
    """Raised when a payload exceeds the entropy a cost map can carry."""
    pass


class ConvergenceFailure(DomainError):
    """Raised when the Lagrange multiplier search does not converge."""
    pass


class CapacityExceeded(DomainError):
    """Raised when a message does not fit the coding construction."""
    pass


class StcInfeasible(DomainError):
    """Raised when every coset member has to flip a wet bit."""
    pass


class LengthMismatch(DomainError):
    """Raised when bit sequence lengths disagree with the code parameters."""
    pass


class ConfigError(DomainError):
    """Raised when an experiment configuration cannot be parsed."""
    pass


class ExperimentStageError(DomainError):
    """Raised when one stage of an experiment pipeline fails."""

    def __init__(self, stage: str, cause: Exception | str):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")
