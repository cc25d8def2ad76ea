"""Exception hierarchy shared by the numerical modules and the CLI."""


class QillumError(Exception):
    """Base class; ``exit_code`` is what the CLI returns when this escapes."""

    exit_code = 1


class ParameterError(QillumError, ValueError):
    exit_code = 1


class DimensionError(ParameterError):
    pass


class SolverError(ParameterError):
    pass


class NumericalHealthError(QillumError, ArithmeticError):
    """A PSD / Hermiticity / realness contract was violated beyond tolerance."""

    exit_code = 2
