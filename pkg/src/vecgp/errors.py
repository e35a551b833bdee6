"""Exception hierarchy for the engine.

Every error raised on purpose derives from ``GPError`` so callers (the CLI in
particular) can map whole families onto exit codes.
"""


class GPError(Exception):
    """Base class for all engine errors."""


# -- configuration -----------------------------------------------------------

class ConfigError(GPError, ValueError):
    """A Config field violates its invariant. ``field`` names the offender."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


# -- data ingestion ----------------------------------------------------------

class DataError(GPError):
    pass


class EmptyFile(DataError):
    pass


class MissingSolutionColumn(DataError):
    pass


class RaggedRow(DataError):
    def __init__(self, row, expected, got):
        self.row, self.expected, self.got = row, expected, got
        super().__init__(f"row {row}: expected {expected} cells, got {got}")


class NonNumericCell(DataError):
    def __init__(self, row, col, text):
        self.row, self.col, self.text = row, col, text
        super().__init__(f"row {row}, column {col}: not a finite real number: {text!r}")


class InvalidShape(DataError, ValueError):
    pass


class InvalidFraction(DataError, ValueError):
    pass


# -- trees and expressions ---------------------------------------------------

class InvalidTree(GPError, ValueError):
    pass


class ExpressionError(GPError):
    pass


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} at position {position}")


class UnknownIdentifier(ExpressionError):
    def __init__(self, name, position=None):
        self.name, self.position = name, position
        where = "" if position is None else f" at position {position}"
        super().__init__(f"unknown identifier {name!r}{where}")


class UnknownOperator(ExpressionError):
    def __init__(self, op, position=None):
        self.op, self.position = op, position
        where = "" if position is None else f" at position {position}"
        super().__init__(f"unknown operator {op!r}{where}")


# -- evaluation and scoring --------------------------------------------------

class FeatureMismatch(GPError):
    pass


class LengthMismatch(GPError, ValueError):
    pass


class LabelOutOfRange(GPError, ValueError):
    pass


# -- evolution ---------------------------------------------------------------

class RetryExhausted(GPError):
    pass


class UnscoredPopulation(GPError):
    pass


# -- archive -----------------------------------------------------------------

class IoFailure(GPError, OSError):
    pass
