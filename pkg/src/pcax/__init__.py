"""PCA, LDA and explained-variance tools built around a Jacobi eigensolver."""
from .errors import ConvergenceError, DataError, NumericalError, PcaxError
from .stats import DataMatrix

__version__ = "0.1.0"

__all__ = ["ConvergenceError", "DataError", "DataMatrix", "NumericalError", "PcaxError", "__version__"]
