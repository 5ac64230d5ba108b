"""Exception types raised by hetphase."""


class HetphaseError(Exception):
    """Base class for all package errors."""


class QuadratureError(HetphaseError, ArithmeticError):
    """A quadrature rule would need more nodes than its configured capacity."""


class TruncationError(HetphaseError, ArithmeticError):
    """A truncated Fock-space state lost more norm than the tolerance allows."""


class SeriesConvergenceError(HetphaseError, ArithmeticError):
    """A series cannot be summed to the requested accuracy."""


class RegimeError(HetphaseError, ValueError):
    """An approximation was requested outside its validity regime."""
