"""Exception hierarchy for saddlebench."""


class SaddlebenchError(Exception):
    """Base class for package-specific errors."""


class DimensionMismatchError(SaddlebenchError, ValueError):
    """A vector does not match the dimension expected by a set or problem."""


class InfeasiblePointError(SaddlebenchError, ValueError):
    """A point violates set membership beyond the membership tolerance."""


class NonFiniteError(SaddlebenchError, ValueError):
    """A NaN or infinity showed up where a finite value is required."""


class InvalidParamsError(SaddlebenchError, ValueError):
    """Solver parameters violate their basic sign/range constraints."""


class DegenerateConstantsError(SaddlebenchError, ValueError):
    """Derived step-size constants are undefined (requires r_x > L, r_y > L)."""


class InfeasibleStepSizesError(SaddlebenchError, RuntimeError):
    """No symmetric step size exists in the searched smoothing-weight range."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best  # closest FeasibilityInterval found


class RegimeUnavailableError(SaddlebenchError, ValueError):
    """The problem lacks structure metadata required by a parameter regime."""


class MeasureUnavailableError(SaddlebenchError, RuntimeError):
    """A stationarity measure cannot be evaluated for this problem."""


class DiagnosticUnavailableError(SaddlebenchError, RuntimeError):
    """The potential-function diagnostic cannot be evaluated for this problem."""


class ConvergenceFailureError(SaddlebenchError, RuntimeError):
    """An inner solve ran out of iterations before reaching its tolerance."""

    def __init__(self, message, residual=None, iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class DivergedError(SaddlebenchError, RuntimeError):
    """An iterate became non-finite. Carries the partial trace."""

    def __init__(self, t, records=None, states=None):
        super().__init__(f"iteration diverged at t={t}")
        self.t = t
        self.records = records if records is not None else []
        self.states = states


class InvalidConfigError(SaddlebenchError, ValueError):
    """An experiment config file or value is malformed."""


class RejectedSpecError(SaddlebenchError, ValueError):
    """An instance spec has invalid family or scale parameters."""
