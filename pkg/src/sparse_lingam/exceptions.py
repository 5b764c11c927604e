"""Exception hierarchy shared across the package."""


class SparseLingamError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SparseLingamError):
    """Malformed input table (ragged rows, non-numeric cells, empty file)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MissingDataError(SparseLingamError):
    """A cell is empty or NaN where a complete table is required."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DegenerateColumnError(SparseLingamError):
    def __init__(self, column):
        super().__init__(f"column {column} has zero variance")
        self.column = column


class RankDeficiencyError(SparseLingamError):
    pass


class InsufficientDataError(SparseLingamError):
    pass


class DegenerateRowError(SparseLingamError):
    pass


class SingularMatrixError(SparseLingamError):
    pass


class DivergenceError(SparseLingamError):
    """The W iterate became non-finite or the objective blew up.

    Usually fixed by lowering the learning rate ``eta``.
    """


class RescaleError(SparseLingamError):
    pass


class ParameterError(SparseLingamError, ValueError):
    pass


class SelectionError(SparseLingamError):
    pass
