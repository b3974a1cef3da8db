"""Exception hierarchy shared by the library and the CLI."""


class NetinfError(Exception):
    """Base class for all errors raised by netinf."""


class DimensionError(NetinfError, ValueError):
    """Array shapes disagree with the declared model dimensions."""


class DataError(NetinfError, ValueError):
    """Input data or a persisted file failed validation."""


class IllPosedProblemError(NetinfError, ArithmeticError):
    """A quadratic problem has a Gram matrix that is not positive definite."""


class NumericalError(NetinfError, ArithmeticError):
    """A computation produced non-finite values or failed to factorize."""
