"""Exception types raised across the package."""


class EhviQuadError(Exception):
    """Base class for all package errors."""


class NumericalError(EhviQuadError, ArithmeticError):
    """Base for failures of a numerical routine (CLI exit code 3)."""


class ConfigError(EhviQuadError, ValueError):
    """Base for invalid inputs or configuration (CLI exit code 2)."""


class NotPositiveDefinite(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class DofTooSmall(ConfigError):
    pass


class OrderOutOfRange(ConfigError):
    pass


class NodeBudgetExceeded(ConfigError):
    pass


class EmptyGrid(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class EmptyFront(ConfigError):
    pass


class PointNotInSet(ConfigError):
    pass


class InvalidFront(ConfigError):
    """Front points are mutually dominated or fail to dominate the reference."""


class DegenerateSpan(ConfigError):
    pass


class NotBivariate(ConfigError):
    pass


class NotIndependent(ConfigError):
    pass


class ResolutionTooLow(NumericalError):
    pass


class InvalidSpec(ConfigError):
    pass


class ParseError(ConfigError):
    pass


class ReferenceNotDominated(ConfigError):
    pass


class LengthMismatch(ConfigError):
    pass


class TooFewSamples(ConfigError):
    pass
