"""Exception hierarchy shared by all modules."""


class PshlabError(Exception):
    """Base class for every error raised by pshlab."""


class DomainError(PshlabError, ValueError):
    """An argument lies outside the set where the operation is defined."""


class RangeError(PshlabError, ValueError):
    """A value lies outside the range of an invertible map."""


class EvaluationError(PshlabError, ArithmeticError):
    """A pointwise evaluation produced a non-finite intermediate."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class AssemblyError(PshlabError):
    """Gram system assembly violated one of its invariants."""


class SolverError(PshlabError):
    """The constrained minimum-norm solve could not be trusted."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class PreconditionError(PshlabError):
    """A diagnostic was asked to judge data that does not meet its hypotheses."""


class ConfigError(PshlabError):
    """A scenario configuration is malformed or fails validation."""
