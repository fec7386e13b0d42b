"""Exception hierarchy shared by every hillgaps module."""


class HillGapsError(Exception):
    """Base class for all package errors."""


class InsufficientResolution(HillGapsError, ValueError):
    """A Fourier table or sample grid is too narrow for the requested work."""


class NumericalFailure(HillGapsError):
    """Base for failures that signal a numerical, not a usage, problem."""


class PairingError(NumericalFailure):
    """Oracle eigenvalue pair falls outside its asymptotic validation band."""

    def __init__(self, n, message):
        super().__init__(f"n={n}: {message}")
        self.n = n


class GuardError(NumericalFailure):
    """A perturbation-series denominator came too close to zero."""

    def __init__(self, partial_sum, message):
        super().__init__(f"partial sum {partial_sum}: {message}")
        self.partial_sum = partial_sum


class ConvergenceError(NumericalFailure):
    """Eigen decomposition did not reach the requested residual."""

    def __init__(self, worst_residual, message=None):
        super().__init__(message or f"worst eigen residual {worst_residual:.3e}")
        self.worst_residual = worst_residual


class PhaseUndefined(NumericalFailure, ValueError):
    """The Fourier coefficient that fixes an eigenfunction phase is zero."""
