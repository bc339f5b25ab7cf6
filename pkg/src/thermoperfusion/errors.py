"""Exception hierarchy shared across the package."""


class ThermoPerfusionError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(ThermoPerfusionError):
    """Non-finite or otherwise unusable numeric input."""


class DomainError(ThermoPerfusionError):
    """Input outside the mathematical domain of an operation."""


class SingularityError(ThermoPerfusionError):
    """Skin temperature too close to arterial temperature for inversion."""


class DegenerateHistogramError(ThermoPerfusionError):
    """Histogram carries no variance; no threshold exists."""


class SegmentationError(ThermoPerfusionError):
    """Thresholding produced no usable face mask."""


class EmptyRoiError(ThermoPerfusionError):
    """ROI covers no effective pixels."""


class PairingError(ThermoPerfusionError):
    """Two series cannot be aligned into pairs."""


class DegenerateSampleError(ThermoPerfusionError):
    """Sample has no variance; the statistic is undefined."""


class UndefinedPercentageError(ThermoPerfusionError):
    """Percentage difference undefined for a zero baseline mean."""


class FrameFormatError(ThermoPerfusionError):
    """Frame file malformed (ragged rows, non-numeric cells, bad header)."""


class FrameRangeError(ThermoPerfusionError):
    """Frame value outside the sensor plausibility window."""


class ManifestError(ThermoPerfusionError):
    """Session manifest malformed or inconsistent."""


class SessionError(ThermoPerfusionError):
    """Session data fails structural validation."""


class ParameterError(ThermoPerfusionError):
    """Invalid configuration or operation parameter."""


class SynthSpecError(ThermoPerfusionError):
    """Synthetic-data specification is internally inconsistent."""
