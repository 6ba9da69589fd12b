"""Exception types shared by the system under test and the harness."""


class MTLabError(Exception):
    """Base class for errors raised by mtlab."""


class DimensionError(MTLabError, ValueError):
    """Operand shapes are incompatible with the requested operation."""


class SingularMatrixError(MTLabError, ArithmeticError):
    """A pivot fell under tolerance (singular, rank deficient, or not PD)."""


class UndefinedMetricError(MTLabError, ValueError):
    """A metric was requested on data where it has no defined value."""


class ExecutionBudgetExceeded(MTLabError):
    """Raised inside a mutated run that exceeded its site-evaluation budget."""
