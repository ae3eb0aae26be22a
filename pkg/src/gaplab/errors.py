"""Exception types shared across the package."""


class GapLabError(Exception):
    """Base class for all package errors."""


class DomainError(GapLabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(GapLabError, ValueError):
    """Inconsistent or malformed configuration (grid sizes, modes, config files)."""


class ConvergenceError(GapLabError, RuntimeError):
    """An iterative solve did not reach its tolerance.

    The partial :class:`~gaplab.linsolve.SolveReport` is attached as ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class IndefiniteMatrixError(GapLabError, RuntimeError):
    """Conjugate gradients met non-positive curvature; the assembled operator is not SPD."""


class VerificationError(GapLabError, AssertionError):
    """A checked mathematical property did not hold."""


class SweepFailure(GapLabError, RuntimeError):
    """A sweep aborted on a failed solve; the partial result (already persisted) is attached."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
