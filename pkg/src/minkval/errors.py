"""Exception types raised by the library.

Every numerical-validity failure derives from :class:`NumericalValidityError`
so that callers (notably the CLI) can map them onto a single exit code.
"""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class RepresentationMismatch(ValueError):
    """Two objects use incompatible discretisations."""


class HypothesisError(ValueError):
    """A precondition of an identity or theorem check is not met."""


class NumericalValidityError(ArithmeticError):
    """Base class for failures of convexity, positivity or resolution."""


class NotConvex(NumericalValidityError):
    """Restricted Hessian of a support function is not positive semi-definite.

    Attributes
    ----------
    eigenvalue : float
        Most negative eigenvalue found.
    where : object
        Location of the offending eigenvalue (a ``t`` value for zonal
        profiles, a node index or unit vector for grid bodies).
    """

    def __init__(self, eigenvalue, where, message=None):
        self.eigenvalue = float(eigenvalue)
        self.where = where
        if message is None:
            message = f"not convex: eigenvalue {self.eigenvalue:.3e} at {where}"
        super().__init__(message)


class ImageNotConvex(NotConvex):
    """The image of a valuation failed the support-function test."""


class NotPositive(NumericalValidityError):
    """Support function is not strictly positive (origin not interior)."""


class AliasingError(NumericalValidityError):
    """Grid samples carry energy above the declared band limit."""


class ZeroMass(NumericalValidityError):
    """Kernel has a non-positive zeroth multiplier."""


class ZeroBody(NumericalValidityError):
    """Normalisation quantity of a body is not positive."""
