"""Exception types shared across the package."""


class PaucPushError(Exception):
    """Base class for every error raised by this package."""


class DataError(PaucPushError):
    """Invalid or inconsistent input data."""


class MissingValue(DataError):
    """Empty cell in a marker column (1-based file coordinates)."""

    def __init__(self, row: int, col: int):
        super().__init__(f"missing value at data row {row}, column {col}")
        self.row = row
        self.col = col


class NonNumeric(DataError):
    """Marker cell that does not parse as a finite number."""

    def __init__(self, row: int, col: int, token: str = ""):
        shown = f" ({token!r})" if token else ""
        super().__init__(f"non-numeric value at data row {row}, column {col}{shown}")
        self.row = row
        self.col = col
        self.token = token


class SingleClass(DataError):
    """Both a diseased and a non-diseased group are required."""


class DuplicateMarkerName(DataError):
    """Marker names must be unique."""


class TooFewPerClass(DataError):
    """Stratified folds need at least k samples in each class."""


class DimensionMismatch(PaucPushError):
    """Model and data disagree on the number of marker columns."""


class ColumnMismatch(PaucPushError):
    """Model marker names cannot be aligned with the dataset columns."""


class InfeasibleFolds(PaucPushError):
    """The requested nested cross-validation cannot keep both classes in
    every training split."""


class NonFiniteLoss(PaucPushError):
    """The optimizer produced a non-finite objective value.

    This signals a numerics bug in the solver, not a user error.
    """
