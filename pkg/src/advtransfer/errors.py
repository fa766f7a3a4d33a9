"""Exception hierarchy shared across the toolkit.

Every error carries an ``exit_code`` so the CLI can map failures onto its
documented process exit codes (2 validation, 3 budget, 4 transport).
"""


class AdvTransferError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 2


class DataFormatError(AdvTransferError):
    """A file does not parse as the expected format (IDX magic, ragged CSV, ...)."""


class DataConsistencyError(AdvTransferError):
    """Parsed data is internally inconsistent (count mismatch, bad labels, ...)."""


class DataSizeError(AdvTransferError):
    """Not enough samples for the requested operation."""


class DimensionMismatchError(AdvTransferError):
    """An input vector does not match the model's feature dimension."""


class UnsupportedFamilyError(AdvTransferError):
    """Operation not defined for this model family (e.g. gradient of a tree)."""


class DegenerateModelError(AdvTransferError):
    """Model parameters make the operation meaningless (e.g. zero-norm hyperplane)."""


class TrainingError(AdvTransferError):
    """Training cannot proceed on the given data."""


class NoAdversarialExistsError(AdvTransferError):
    """The classifier admits no adversarial sample for this input (single-class tree)."""


class BudgetExceededError(AdvTransferError):
    """The oracle query budget ran out.

    ``labeled`` optionally carries labels obtained before exhaustion so callers
    can return a partial-state report.
    """

    exit_code = 3

    def __init__(self, message, labeled=None):
        super().__init__(message)
        self.labeled = labeled


class TransportError(AdvTransferError):
    """A remote oracle could not be reached, after retrying."""

    exit_code = 4

    def __init__(self, message, retries=0):
        super().__init__(message)
        self.retries = retries


class MeasurementUnavailableError(AdvTransferError):
    """The oracle handle has no uncounted measurement channel configured."""
