"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DomainEscapeError(DomainError):
    """An iterated orbit left the map's domain.

    Attributes
    ----------
    step : index of the iteration at which the escape happened
    value : the offending value
    """

    def __init__(self, message, step=None, value=None):
        super().__init__(message)
        self.step = step
        self.value = value


class BracketError(ValueError):
    """A root bracket does not enclose a sign change."""


class SingularityError(DomainError):
    """Evaluation requested exactly at a non-differentiable or critical point."""


class ConfigurationError(ValueError):
    """An experiment configuration is unusable (e.g. excessive rejection rate)."""


class NonConvergenceError(RuntimeError):
    """A numerical routine exhausted its step budget.

    Carries whatever partial state the routine had accepted so far as
    attributes (e.g. ``t``/``state`` for an ODE solve, ``estimate``/
    ``error_bound`` for a quadrature).
    """

    def __init__(self, message, **partial):
        super().__init__(message)
        for key, val in partial.items():
            setattr(self, key, val)
        self.partial = partial
