"""Exception types shared across the package."""


class CapacityError(RuntimeError):
    """A requested computation exceeds a hard resource cap.

    Raised for statevectors beyond the qubit cap, frequency lattices too
    large to materialize, and integer quantities that would overflow the
    63-bit budget used for exact bookkeeping.
    """


class TrainingError(RuntimeError):
    """Training aborted: diverging loss or non-finite gradients.

    Carries the partial result record (if any) collected before the abort
    so callers can persist a trace for diagnosis.
    """

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class ConfigError(ValueError):
    """A run configuration document failed validation."""


class DatasetParseError(ValueError):
    """A dataset file could not be parsed; message includes the row number."""
