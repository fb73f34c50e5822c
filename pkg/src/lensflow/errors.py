"""Exception types raised across the package."""


class LensflowError(Exception):
    """Base class for all package errors."""


class InvalidGridError(LensflowError, ValueError):
    """A discretized profile violates its structural invariants."""


class DomainError(LensflowError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class CompatibilityError(LensflowError, ValueError):
    """Initial data does not satisfy the 60 degree contact condition."""


class ContactSlopeError(LensflowError, RuntimeError):
    """The contact slope drifted away from +-sqrt(3) during time stepping."""


class ExtinctionReached(LensflowError):
    """The lens collapsed below the extinction threshold."""


class InstabilityError(LensflowError, FloatingPointError):
    """Time stepping produced non-finite values."""


class BracketError(LensflowError, RuntimeError):
    """A root-finding bracket could not be established."""


class ToleranceError(LensflowError, RuntimeError):
    """A numerical tolerance could not be reached."""


class ClosureError(LensflowError, RuntimeError):
    """A reconstructed network fails to close up within tolerance."""
