from src.exceptions import IRBError


class ShapeError(IRBError, ValueError):
    """Operand shapes violate an operation's contract."""


class BackwardError(IRBError):
    """Backward pass requested on something other than a scalar loss."""


class OptimizerError(IRBError, ValueError):
    """Invalid optimizer hyper-parameter or state."""
