"""Exception hierarchy shared by all modules."""


class CatenoidError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CatenoidError, ValueError):
    """A coordinate lies outside the chart or profile interval."""


class ChartMismatchError(CatenoidError, ValueError):
    """A grid and a mode problem live on different charts."""


class SingularBoundaryError(CatenoidError, ZeroDivisionError):
    """A boundary value is too small to form a Steklov ratio."""


class ShiftSingularError(CatenoidError, ArithmeticError):
    """The shift passed to a pencil count hits an eigenvalue."""

    def __init__(self, shift, n_zero):
        super().__init__(f"shift {shift!r} is within zero tolerance of {n_zero} pencil eigenvalue(s)")
        self.shift = shift
        self.n_zero = n_zero


class InteriorSingularError(CatenoidError, ArithmeticError):
    """The interior block of a Steklov pencil has a (numerical) kernel."""


class NonpositiveHError(CatenoidError, ValueError):
    """A ground-state candidate is not strictly positive."""


class NotSolvableError(CatenoidError, ValueError):
    """Dirichlet data violates the solvability condition."""


class ZeroFunctionError(CatenoidError, ValueError):
    """A test function vanishes identically."""


class GramSingularError(CatenoidError, ArithmeticError):
    """A Gram matrix that must be definite is not."""
