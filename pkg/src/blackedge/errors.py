"""Exception types shared across the package."""


class BlackedgeError(Exception):
    """Base class for all blackedge errors."""


class DimensionMismatch(BlackedgeError):
    """Operands refer to graphs or vectors of incompatible size."""


class ZeroVector(BlackedgeError):
    """A direction with zero L2 norm cannot be normalized."""


class ShapeMismatch(BlackedgeError):
    """Model weight matrices do not chain to the expected shapes."""


class MissingFeatures(BlackedgeError):
    """A graph lacks node features required by the classifier."""


class UnknownGraph(BlackedgeError):
    """A lookup oracle was queried with a graph outside its table."""


class BudgetExhausted(BlackedgeError):
    """The query budget was hit; the attack must terminate.

    ``partial`` optionally carries the best intermediate result found
    before the budget ran out.
    """

    def __init__(self, message="query budget exhausted", partial=None):
        super().__init__(message)
        self.partial = partial


class NoAdversarialFound(BlackedgeError):
    """Initial search exhausted every phase without a label change."""


class NoBoundary(BlackedgeError):
    """No decision boundary exists along the given direction."""


class DegenerateTarget(BlackedgeError):
    """The objective value cannot be inverted along the new direction."""


class ParseError(BlackedgeError):
    """A dataset file is malformed; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


class DanglingNode(BlackedgeError):
    """A node references a graph id that does not exist."""


class InvalidParams(BlackedgeError):
    """Synthetic generator parameters are out of range."""


class ConfigError(BlackedgeError):
    """An experiment configuration is invalid."""
