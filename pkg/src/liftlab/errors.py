"""Exception types shared across the engine."""


class LiftLabError(Exception):
    """Base class for all liftlab errors."""


class ParseError(LiftLabError):
    """Expression text could not be parsed.

    Carries the 0-based character position of the offending token when known.
    """

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class DomainError(LiftLabError):
    """Evaluation left the expression's domain (log of nonpositive, division
    by zero, fractional power of a negative base, ...)."""


class SingularMatrixError(LiftLabError):
    """A matrix that must be invertible (metric, Jacobian, coefficients) is
    numerically singular."""


class FlowDomainError(LiftLabError):
    """A flow trajectory left the chart's sampling box or became non-finite."""


class CrossCheckError(LiftLabError):
    """Closed-form and flow-oracle results disagree beyond the configured
    cross-check tolerance.  This signals an engine defect, not a geometric
    verdict."""


class ConfigError(LiftLabError):
    """A run configuration failed validation."""
