"""Exception hierarchy shared by the analysis, solver and simulation layers."""


class RelayError(Exception):
    """Base class for every error raised by this package."""


class DomainError(RelayError, ValueError):
    """An argument lies outside the domain of a special function or model."""


class SolverError(RelayError, RuntimeError):
    """A root finder or linear solve failed.

    ``diagnostics`` carries whatever the solver knew at the point of failure
    (bracket endpoints, residuals, iteration counts).
    """

    def __init__(self, message, **diagnostics):
        self.diagnostics = diagnostics
        if diagnostics:
            detail = ", ".join(f"{k}={v!r}" for k, v in diagnostics.items())
            message = f"{message} ({detail})"
        super().__init__(message)


class NoSignChangeError(SolverError):
    pass


class MaxIterationsError(SolverError):
    pass


class SingularChainError(SolverError):
    """The transition matrix has no unique stationary distribution."""


class DegenerateChainError(RelayError, ValueError):
    """Closed-form occupancy is singular because 2p + q - 1 vanishes."""


class UnstableQueueError(RelayError, ValueError):
    """The mean delay grows without bound with the buffer size."""


class InconsistentCaseError(RelayError, ValueError):
    pass


class RegimeError(RelayError, ValueError):
    """Outage probabilities fall outside the regime a formula was derived for."""


class UnachievableDelayError(RelayError, ValueError):
    """No delay-constrained variant reaches the requested mean delay.

    ``nearest`` is the closest achievable delay.
    """

    def __init__(self, message, nearest=None):
        self.nearest = nearest
        super().__init__(message)


class ConfigError(RelayError, ValueError):
    """Invalid or incomplete experiment configuration."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
