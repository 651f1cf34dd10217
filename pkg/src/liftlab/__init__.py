"""liftlab: numerical geometry of lift metrics on tangent bundles.

Builds the two-parameter family of lift metrics on TM from a base
Riemannian metric, computes Lie derivatives along lifted vector fields by
closed-form tensor calculus and by an independent flow-pullback oracle,
and classifies fields as Killing / homothetic / conformal.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    CrossCheckError,
    DomainError,
    FlowDomainError,
    LiftLabError,
    ParseError,
    SingularMatrixError,
)

__all__ = [
    "__version__",
    "LiftLabError",
    "ParseError",
    "DomainError",
    "SingularMatrixError",
    "FlowDomainError",
    "CrossCheckError",
    "ConfigError",
]
