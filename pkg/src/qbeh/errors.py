"""Exception hierarchy shared by every module in the package."""


class QbehError(Exception):
    """Base class for all package errors."""


class ValidationError(QbehError, ValueError):
    """Invalid user-supplied parameters."""


class DimensionError(QbehError, ValueError):
    """Shapes do not conform."""


class CapacityError(QbehError, MemoryError):
    """A requested product would exceed the allowed number of entries."""


class SymmetryError(QbehError, ValueError):
    """A matrix expected to be symmetric is not, beyond tolerance."""

    def __init__(self, message, asymmetry=None):
        super().__init__(message)
        self.asymmetry = asymmetry


class StabilityError(QbehError, ValueError):
    """The state matrix is not (strictly) stable."""

    def __init__(self, message, abscissa):
        super().__init__(message)
        self.abscissa = abscissa


class NumericalError(QbehError, ArithmeticError):
    """A numerical kernel failed or missed its accuracy target."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class PreconditionError(QbehError, ValueError):
    """A hypothesis of the monotone fixed-point theorem does not hold."""

    def __init__(self, message, inequality, min_eigenvalue):
        super().__init__(message)
        self.inequality = inequality
        self.min_eigenvalue = min_eigenvalue


class DivergenceError(QbehError, ArithmeticError):
    """The fixed-point iteration blew up."""

    def __init__(self, message, history):
        super().__init__(message)
        self.history = list(history)


class BlowUpError(QbehError, ArithmeticError):
    """A simulated trajectory left the admissible range."""

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time


class FormatError(QbehError, ValueError):
    """A file on disk is missing or malformed."""

    def __init__(self, message, path=None, line=None):
        where = str(path) if path is not None else "<input>"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line
