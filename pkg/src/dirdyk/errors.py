"""Exception hierarchy shared by the package."""


class DirdykError(Exception):
    """Base class for all package errors."""


class GraphError(DirdykError, ValueError):
    """Invalid directed graph."""


class SelfLoopError(GraphError):
    pass


class DuplicateEdgeError(GraphError):
    pass


class NodeIndexError(GraphError, IndexError):
    pass


class NotStronglyConnectedError(GraphError):
    pass


class DimensionError(DirdykError, ValueError):
    """Vector or matrix dimensions do not match the problem dimension."""


class ProtocolError(DirdykError):
    """An operation was applied outside its precondition."""


class InvariantViolation(DirdykError):
    """A conserved quantity or monotone potential drifted past tolerance."""

    def __init__(self, message, iteration=None, event=None):
        super().__init__(message)
        self.iteration = iteration
        self.event = event

    def __str__(self):
        msg = super().__str__()
        if self.iteration is not None:
            msg = f"iteration {self.iteration}: {msg}"
        if self.event is not None:
            msg = f"{msg} (after {self.event})"
        return msg


class ProblemFormatError(DirdykError, ValueError):
    """A problem or config file could not be parsed or validated."""


class ConvergenceError(DirdykError, RuntimeError):
    """The centralized reference solver hit its iteration cap."""
