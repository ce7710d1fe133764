"""Exception hierarchy shared by all vacua modules."""


class VacuaError(Exception):
    """Base class for every error raised by the package."""


class DomainError(VacuaError, ValueError):
    """Evaluation point outside the declared domain of a profile."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class ParameterError(VacuaError, ValueError):
    pass


class RegimeError(VacuaError, ValueError):
    """Closed form requested outside the regime where it exists."""


class ConfigError(VacuaError, ValueError):
    pass


class IntegrationError(VacuaError, RuntimeError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class SingularityError(VacuaError, ArithmeticError):
    """A coefficient that appears in a denominator vanished (e.g. d omega/dt = 0)."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class WindowError(VacuaError, ValueError):
    pass


class ReferenceDegenerateError(VacuaError, ArithmeticError):
    pass


class ConvergenceError(VacuaError, RuntimeError):
    """All optimizer restarts failed; ``best`` carries the best point seen."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
