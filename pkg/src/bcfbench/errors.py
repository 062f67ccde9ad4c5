"""Exception types shared across modules.

The CLI maps these onto exit codes: numerical failures give 1 and
instabilities give 3.
"""


class NumericalError(ArithmeticError):
    """A numerical procedure failed to reach its tolerance."""

    def __init__(self, msg, estimate=None, error=None):
        super().__init__(msg)
        self.estimate = estimate
        self.error = error


class QuadratureError(NumericalError):
    """Adaptive quadrature did not converge."""


class PoleError(NumericalError, ZeroDivisionError):
    """Evaluation exactly at a divergent point."""


class RankDeficiencyError(NumericalError):
    """Requested more exponential terms than the data supports."""


class FitError(NumericalError):
    """A fit produced no usable model."""


class ConvergenceError(NumericalError):
    """An iteration stopped before meeting its tolerance."""

    def __init__(self, msg, last=None, residuals=None):
        super().__init__(msg)
        self.last = last
        self.residuals = residuals


class InstabilityError(RuntimeError):
    """Propagation blew up (unstable generator or hierarchy)."""

    def __init__(self, msg, eigenvalue=None):
        super().__init__(msg)
        self.eigenvalue = eigenvalue
