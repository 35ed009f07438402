"""Exception hierarchy shared across the package."""


class SketchRLError(Exception):
    """Base class for all package errors."""


class ContractViolation(SketchRLError):
    """An operation was called outside its declared domain."""


class ConfigurationError(SketchRLError):
    """Invalid or inconsistent configuration values."""


class SketchParseError(SketchRLError):
    """A dataset line could not be decoded as JSON."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class SketchFormatError(SketchRLError):
    """A decoded dataset record violates the simplified-format contract."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class CheckpointError(SketchRLError):
    """Checkpoint file is corrupt, truncated, or of the wrong kind."""


class TrainingFault(SketchRLError):
    """Training produced a non-finite value; the run halts."""


class TrajectoryFidelityError(SketchRLError):
    """An exported trajectory does not map back onto the canvas grid."""
