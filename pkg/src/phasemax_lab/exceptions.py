"""Exception types raised across phasemax_lab."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined.

    ``boundary`` optionally carries the edge of the admissible region.
    """

    def __init__(self, message, boundary=None):
        super().__init__(message)
        self.boundary = boundary


class NumericalFailure(ArithmeticError):
    """Non-finite values appeared in solver iterates."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class Unbounded(RuntimeError):
    """The PhaseMax objective is unbounded over the feasible set."""


class Infeasible(RuntimeError):
    """No feasible vertex was found (should never happen: +/- target are feasible)."""


class NoFixedPoint(RuntimeError):
    """The fixed-point scan found no nontrivial root below the transition."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class MultipleFixedPoints(RuntimeError):
    """More than one stable nontrivial root was found."""


class Unstable(RuntimeError):
    """A located fixed point failed the |h'(q)| < 1 stability check."""


class NoCrossing(RuntimeError):
    """Empirical records never cross the success threshold."""
