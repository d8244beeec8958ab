"""Exception types raised across the package."""


class DPANCSError(Exception):
    """Base class for all package errors."""


class DivergenceError(DPANCSError):
    """A Fock-space series does not converge for the requested amplitude."""


class ConvergenceError(DPANCSError):
    """A tolerance could not be reached within the term or node cap."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NonlinearityError(DPANCSError, ValueError):
    """Invalid or unsupported nonlinearity function."""


class NoClosedFormError(DPANCSError):
    """No closed form is available; callers should fall back to series."""


class ContourError(DPANCSError):
    """Mellin-Barnes contour cannot be placed or its tail does not decay."""


class FiniteDomainError(DPANCSError):
    """Weight lives on a finite disk (Hausdorff-type); not supported."""


class QuadratureError(DPANCSError):
    """Moment quadrature failed or its tail exceeds the error budget."""


class NoClickError(DPANCSError):
    """Post-selection probability is numerically zero."""


class TruncationWarning(UserWarning):
    """Weight leaks into the top levels of the truncated Fock space."""
