"""Exception types shared across the package."""


class FinestructError(Exception):
    """Base class for domain errors raised by this package."""


class SingularityError(FinestructError, ZeroDivisionError):
    """An evaluation hit a zero divisor; ``magnitude`` is the offending modulus."""

    def __init__(self, message: str, magnitude: float = 0.0):
        super().__init__(f"{message} (|divisor| = {magnitude:.3e})")
        self.magnitude = magnitude


class RealAxisError(FinestructError, ValueError):
    """A closed form that needs a non-real argument was called on the real axis."""


class OutsideRegionError(FinestructError, ValueError):
    """A point lies outside the convergence region of a series."""


class IllConditionedError(FinestructError, ValueError):
    """A quadrature target sits too close to the integration contour."""


class OutsideRegionWarning(UserWarning):
    """Series was evaluated outside its estimated region of convergence."""
