"""Exception types raised by the simulator."""


class DomainError(ValueError):
    """An input lies outside the domain of the operation."""


class DegenerateInputError(DomainError):
    """Input is well-formed but degenerate (e.g. all masses zero)."""


class InfeasibleRateError(DomainError):
    """Commission rate violates the individual-rationality bound."""

    def __init__(self, message, node_id=None, bound=None):
        super().__init__(message)
        self.node_id = node_id
        self.bound = bound


class NotFoundError(KeyError):
    """Unknown node id."""


class PreconditionError(RuntimeError):
    """A protocol step was invoked out of order or on empty input."""
