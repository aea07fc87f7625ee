"""Exception types. Everything raised for bad data or bad inputs derives
from :class:`MoirebenchError` so the CLI can map it to exit code 2."""


class MoirebenchError(Exception):
    """Base class for data and validation failures."""


class ImageValueError(MoirebenchError, ValueError):
    """An image array violates the expected dtype/shape/range contract."""


class DegenerateCornersError(MoirebenchError, ValueError):
    """Four-point correspondence does not determine a projective map."""


class CropRegionError(MoirebenchError, ValueError):
    """A requested crop falls outside the image or its valid content."""


class DegenerateInputError(MoirebenchError, ValueError):
    """Input carries no usable signal (e.g. a constant pattern image)."""


class ConfigError(MoirebenchError, ValueError):
    """Config file is malformed, has unknown keys, or invalid values."""


class InsufficientSourcesError(MoirebenchError):
    """Not enough classifiable source images to fill the requested splits."""


class RebalanceExhaustedError(MoirebenchError):
    """Frequency rebalancing hit its retry cap; manifest flagged unbalanced."""


class DatasetLayoutError(MoirebenchError):
    """Dataset directory or manifest is missing or inconsistent."""


class MissingResultsError(MoirebenchError):
    """A submission directory lacks results for some manifest entries."""


class DimensionMismatchError(MoirebenchError, ValueError):
    """Two images that must share dimensions do not."""


class StudyError(MoirebenchError):
    """MOS study file is invalid or references missing images."""


class UnknownQueryError(MoirebenchError, KeyError):
    """Rating submitted for a query index that does not exist."""


class AlreadyRatedError(MoirebenchError):
    """Rating submitted twice for the same (judge, query)."""


class ScoreRangeError(MoirebenchError, ValueError):
    """Rating outside the 1..5 scale."""
