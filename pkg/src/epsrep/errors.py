class EpsrepError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(EpsrepError, ValueError):
    pass


class UnboundedBoxError(EpsrepError):
    """A variable has no finite upper bound, explicit or implied."""


class BudgetExceededError(EpsrepError):
    """An enumeration or search exceeded its configured budget."""


class NodeBudgetExceeded(BudgetExceededError):
    pass


class NumericalInstabilityError(EpsrepError):
    """The simplex pivot safeguards tripped; the model likely needs rescaling."""


class UnboundedObjectiveError(EpsrepError):
    pass


class InfeasibleProblemError(EpsrepError):
    pass


class ZeroRangeError(EpsrepError, ValueError):
    """A constrained objective has ideal == nadir, so its slack cannot be normalised."""


class InconsistentSolutionError(EpsrepError):
    pass


class CacheInconsistencyError(EpsrepError):
    """Shadow solving disagreed with a redundancy-cache reuse."""


class RunTimeoutError(EpsrepError):
    pass


class InstanceFormatError(EpsrepError, ValueError):
    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.field = field
