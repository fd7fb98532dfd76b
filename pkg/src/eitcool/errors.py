"""Exception and warning types raised across the package."""


class NonUniqueSteadyStateError(RuntimeError):
    """The generator has a degenerate null space, so no unique stationary state exists."""


class HeatingError(RuntimeError):
    """Net heating (A+ >= A-): the phonon rate equation has no steady state."""


class IntegrationInstabilityError(RuntimeError):
    """Time propagation produced non-finite values; reduce the step size."""


class GridEdgeError(RuntimeError):
    """An optimum landed on the edge of the search grid; widen the grid."""


class DegenerateFitError(RuntimeError):
    """The normal equations are singular (a parameter has no effect on the model)."""


class FitConvergenceError(RuntimeError):
    """Iteration limit reached before convergence.  Carries the last iterate."""

    def __init__(self, message, last_result=None):
        super().__init__(message)
        self.last_result = last_result


class ConfigError(ValueError):
    """A scenario configuration failed validation; the message names the key."""


class LambDickeWarning(UserWarning):
    """The Lamb-Dicke parameter is too large for the expansion to be reliable."""


class HeatingWarning(UserWarning):
    """Phonon dynamics evaluated on the exponential-growth (heating) branch."""


class LeakWarning(UserWarning):
    """Population leaks out of the three-level system; reported state is quasi-steady."""
