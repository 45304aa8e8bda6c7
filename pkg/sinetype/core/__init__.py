class InputError(ValueError):
    """Raised when caller-supplied data violates a documented precondition."""


class NumericalFailure(Exception):
    """Raised when a solver or a certification step cannot deliver its guarantee."""
