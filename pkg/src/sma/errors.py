"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class SMAError(Exception):
    exit_code = 1


class ArgumentError(SMAError, ValueError):
    exit_code = 2


class DimensionError(ArgumentError):
    """Vectors that must share a length do not."""


class DegenerateInputError(ArgumentError):
    """Input is valid in form but the quantity is undefined (e.g. zero variance)."""


class ParseError(SMAError):
    exit_code = 3


class NumericError(SMAError, ArithmeticError):
    exit_code = 4
