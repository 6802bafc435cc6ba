"""Exception hierarchy shared across the package."""


class OqhoError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(OqhoError, ValueError):
    """Matrix shapes are mutually inconsistent."""


class ValidationError(OqhoError, ValueError):
    """A structural invariant of an input object is violated."""


class PreconditionError(OqhoError, ValueError):
    """A documented precondition of an operation does not hold."""


class ResonanceError(OqhoError):
    """A Lyapunov/Sylvester equation is singular due to resonant spectra."""

    def __init__(self, message, eig_pair=None):
        super().__init__(message)
        self.eig_pair = eig_pair


class DiagonalizabilityError(OqhoError):
    """An eigenvector matrix is too ill-conditioned to trust."""


class InvalidMomentMatrixError(OqhoError, ValueError):
    """A claimed second-moment matrix fails positive semi-definiteness."""


class NumericalError(OqhoError):
    """A numerical kernel failed to reach its accuracy contract."""
