"""Exception hierarchy shared across the package."""


class EgoGazeError(Exception):
    """Base class for all errors raised by this package."""


class GeometryError(EgoGazeError):
    """Frame dimensions and grid side are incompatible."""


class DimensionError(EgoGazeError):
    """Feature vectors have mismatched or unusable lengths."""


class InvalidFrameError(EgoGazeError):
    """Frame payload does not match its declared dimensions."""


class MissingFlowError(EgoGazeError):
    """A flow map is required by the feature scheme but absent."""


class ConfigError(EgoGazeError):
    """A parameter or configuration value is out of range or unknown."""


class PipelineError(EgoGazeError):
    """Streaming contract violated (frame order, geometry drift, ...)."""


class EmptyEvaluationError(EgoGazeError):
    """An evaluation was requested over zero usable records."""


class DecodeError(EgoGazeError):
    """An input byte stream could not be decoded (PPM, RAWVIDEO, flow, ...)."""


class SchemaError(EgoGazeError):
    """A structured input file violates its schema.

    Carries the 1-based line number of the offending row when known.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
