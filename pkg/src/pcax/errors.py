"""Exception hierarchy shared by all pcax modules."""


class PcaxError(Exception):
    """Base class for every error raised by pcax."""


class DataError(PcaxError, ValueError):
    """Input data violates a precondition (shape, content, missing columns...)."""


class NumericalError(PcaxError, ArithmeticError):
    """A numerical procedure cannot produce a meaningful answer."""


class ConvergenceError(NumericalError):
    """An iterative method hit its iteration cap."""
