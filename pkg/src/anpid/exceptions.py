"""Exception types raised across the package.

Every error condition with a contract (bad shapes, singular preconditioners,
degenerate geometry, ...) gets its own class so callers and tests can catch
precisely what they expect.
"""


class AnpidError(Exception):
    """Base class for all package errors."""


class ShapeError(AnpidError, ValueError):
    """Array dimensions are inconsistent with the operation."""


class BadOrderError(AnpidError, ValueError):
    """Unsupported constellation order (only 4, 16, 64 square QAM)."""


class NonFiniteInputError(AnpidError, ValueError):
    """Input contains NaN or Inf where finite values are required."""


class DegenerateGeometryError(AnpidError, ValueError):
    """A user position coincides with an array element (zero distance)."""


class SingularPreconditionerError(AnpidError, ValueError):
    """Preconditioner has a zero diagonal entry and cannot be applied."""


class NotSpdError(AnpidError, ValueError):
    """Matrix is not Hermitian positive definite where a direct solve needs it."""


class IntractableError(AnpidError, ValueError):
    """Exhaustive search space exceeds the brute-force guard."""


class DegenerateColumnError(AnpidError, ValueError):
    """Channel matrix has an all-zero column; per-stream bound undefined."""


class DegenerateNormalizationError(AnpidError, ValueError):
    """diag(M^-1 A) has a zero entry; normalized preconditioner undefined."""


class DegenerateFirstDecisionError(AnpidError, ValueError):
    """First hard decision maps to the zero vector; fixed damping undefined."""


class NoBudgetError(AnpidError, KeyError):
    """No complexity budget is tabulated for the requested algorithm."""


class ConfigError(AnpidError, ValueError):
    """Base class for CLI / config-file errors."""


class ConfigParseError(ConfigError):
    """Config file is not well-formed."""


class ConfigValidationError(ConfigError):
    """Config file parsed but a field is missing, unknown, or out of range."""
