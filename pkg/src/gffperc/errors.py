"""Exception types raised by the public API.

Every failure mode that callers are expected to handle gets its own class so
that tests and command-line wrappers can branch on the type rather than on
message text.
"""


class GffpercError(Exception):
    """Base class for all package-specific errors."""


class ParseError(GffpercError):
    """An edge-list document is malformed (bad token, negative index, ...)."""


class SelfLoop(ParseError):
    """An edge joins a vertex to itself."""


class DuplicateEdge(ParseError):
    """The same unordered vertex pair appears more than once."""


class Disconnected(GffpercError):
    """The graph is not connected."""


class TooSmall(GffpercError):
    """The graph has fewer than two vertices."""


class TooLarge(GffpercError):
    """A dense-only operation was asked for on a graph above the dense cutoff."""


class PreconditionError(GffpercError, ValueError):
    """Arguments violate a documented precondition."""


class BadParams(PreconditionError):
    """Generator parameters are out of range for the requested family."""


class GenerationFailed(GffpercError):
    """Random-graph generation exhausted its retry budget."""


class BadK(PreconditionError):
    """A vertex subset is empty, out of range, or covers the whole graph."""


class SolverFailure(GffpercError):
    """A linear solve did not reach the required residual."""


class FactorizationFailure(GffpercError):
    """A matrix factorization failed (not positive definite, singular, ...)."""


class RouteMismatch(GffpercError):
    """Two independent computational routes disagree beyond tolerance."""


class DimensionMismatch(PreconditionError):
    """An array argument has the wrong length for the graph at hand."""


class InsufficientData(GffpercError):
    """Not enough rows / distinct sizes to fit the requested statistic."""


class EmptyInput(GffpercError):
    """An aggregation was asked for on an empty collection."""
