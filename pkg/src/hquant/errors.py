"""Exception types shared across the package."""


class HQuantError(Exception):
    """Base class for all package-specific errors."""


class DegenerateVectorError(HQuantError, ValueError):
    """A reflection vector has (near-)zero norm and defines no hyperplane."""


class DimensionMismatchError(HQuantError, ValueError):
    """Operands disagree on the embedding / bit width."""


class NotOrthogonalError(HQuantError, ValueError):
    """Matrix fails the orthogonality precondition."""


class ZeroRowError(HQuantError, ValueError):
    """An embedding row has (near-)zero norm and cannot be normalized."""

    def __init__(self, row, message=None):
        self.row = row
        super().__init__(message or f"embedding row {row} has near-zero norm")


class NonFiniteError(HQuantError, ValueError):
    """An input matrix or a loss value is NaN or infinite."""


class MissingLabelsError(HQuantError, ValueError):
    """Labels are required for evaluation but absent or empty."""


class ValidationError(HQuantError, ValueError):
    """An in-memory value violates a structural invariant."""


class NumericalError(HQuantError, RuntimeError):
    """A numerical routine (e.g. an SVD) failed to converge."""


class FormatError(HQuantError, ValueError):
    """Malformed file. ``offset`` is the byte offset of the fault when known."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        self.offset = offset
        super().__init__(message)
