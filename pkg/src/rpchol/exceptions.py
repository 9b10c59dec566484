"""Exception types shared across the package."""


class RpcholError(Exception):
    """Base class for package-specific failures."""


class NoValidPivotError(RpcholError):
    """No index with a usable residual diagonal remains."""


class MissingInformationError(RpcholError, ValueError):
    """The requested quantity needs state the chosen engine does not track."""


class ConvergenceError(RpcholError, RuntimeError):
    """An iterative routine exhausted its iteration budget."""


class EngineMismatchError(RpcholError):
    """Dense and factored engines diverged on identical inputs and streams."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
