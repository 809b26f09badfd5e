"""Exception types shared across the package."""


class EmptyMaskError(ValueError):
    """Raised when an operation requires at least one foreground pixel."""


class InvalidBoxError(ValueError):
    """Raised for boxes with non-positive extents or non-finite parameters."""


class MaskFormatError(ValueError):
    """Raised when a mask image cannot be interpreted as a binary mask."""


class BudgetExceededError(RuntimeError):
    """Raised when a mask is too large for exhaustive-search validation."""


class EmptySequenceError(ValueError):
    """Raised for sequences without frames or with inconsistent frame sizes."""


class EmptyFirstFrameError(ValueError):
    """Raised when the first frame is empty but needed for initialization."""


class TrackerRunError(ValueError):
    """Raised for malformed tracker trajectory files."""


class EvaluationConfigError(ValueError):
    """Raised when a tracker run is paired with an incompatible reference track."""
