"""Exception types shared across the package."""


class SrlError(Exception):
    """Base class for all package-specific errors."""


class DomainError(SrlError):
    """Evaluation requested outside the domain of a field or map."""


class ConfigError(SrlError):
    """Invalid or inconsistent configuration."""


class DimensionError(SrlError):
    """Operation requires a chart of a different dimension."""


class SingularPairingError(SrlError):
    """Pairing of a singular 1-form with a vector transverse to the critical set."""


class NotOnCriticalSetError(SrlError):
    """Point is not on the critical set within tolerance."""


class DegenerateContactError(SrlError):
    """Contact condition fails at the requested point."""


class DegenerateSymplecticError(SrlError):
    """Symplectic (or induced surface) form is degenerate at the requested point."""


class DegeneracyError(SrlError):
    """A required nondegeneracy condition fails (for example alpha(X) = 0)."""


class EpsilonTooLargeError(SrlError):
    """Perturbation amplitude destroys the contact condition on its support."""


class GluingError(SrlError):
    """Glued form fails the contact test on the transition region."""

    def __init__(self, message, worst_point=None, min_coeff=None):
        super().__init__(message)
        self.worst_point = worst_point
        self.min_coeff = min_coeff
