"""Exception types shared across the package."""

import numpy as np


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Cholesky factorization hit a non-positive pivot."""

    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"matrix not positive definite (pivot {column})")


class CholeskyDowndateError(np.linalg.LinAlgError):
    """Rank-1 downdate would make the factored matrix indefinite."""


class SingularPivotBlockError(np.linalg.LinAlgError):
    """The selected pivot block A(J, J) is numerically singular."""


class PivotBreakdownError(RuntimeError):
    """No admissible pivot candidate is left (e.g. the denominator
    residual diagonal vanished everywhere)."""


class UnreliableRatioError(RuntimeError):
    """The trace-matrix determinant ratio cannot be trusted."""

    def __init__(self, cond, message=None):
        self.cond = cond
        super().__init__(message or f"trace-matrix ratio unreliable (cond ~ {cond:.3e})")


class InfeasibleExtensionError(RuntimeError):
    """The residual rank is too low for the requested extension, so the
    conditional expectation is taken over an empty event set."""


class CombinatorialGuardError(ValueError):
    """An exhaustive-enumeration oracle refused a too-large search space."""
