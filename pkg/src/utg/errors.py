"""Exception types shared across the toolkit."""


class UtgError(Exception):
    """Base class for all toolkit errors."""


class DataLoadError(UtgError):
    """A dataset file could not be parsed or violates its schema.

    Carries optional row/column coordinates so CSV cell failures can be
    reported precisely.
    """

    def __init__(self, message, *, row=None, column=None):
        self.row = row
        self.column = column
        if row is not None or column is not None:
            where = ", ".join(
                s for s in (
                    f"row {row}" if row is not None else None,
                    f"column {column!r}" if column is not None else None,
                ) if s
            )
            message = f"{message} ({where})"
        super().__init__(message)


class SchemaError(UtgError):
    """A column schema document is malformed."""


class ShapeError(UtgError):
    """Tensor or model geometry mismatch."""


class DivergenceError(UtgError):
    """Training produced a non-finite value."""


class ModelFormatError(UtgError):
    """A model file is corrupt or has the wrong magic/version."""
