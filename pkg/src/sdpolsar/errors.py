"""Exception types shared across the toolkit."""


class PolsarError(Exception):
    """Base class for every error raised by this package."""


class EmptySampleSet(PolsarError):
    """Multilooking was asked to average an empty collection of vectors."""


class NotPositiveDefinite(PolsarError):
    """A matrix that must be Hermitian positive definite is not."""


class InvalidVariance(PolsarError):
    """A channel power that must be strictly positive is zero or negative."""


class DimensionMismatch(PolsarError):
    """Two matrices that must share a dimension do not."""


class QuadratureFailed(PolsarError):
    """Adaptive quadrature did not converge within its subdivision budget."""


class OutOfRange(PolsarError):
    """An angle lies outside the domain of the requested operation."""


class DegenerateInput(PolsarError):
    """Input carries no usable power (non-positive trace)."""


class InvalidParams(PolsarError):
    """Configuration or modulation parameters violate their invariants."""


class EmptyRaster(PolsarError):
    """A reduction was asked to run over zero valid pixels."""


class BadRoi(PolsarError):
    """A region of interest does not fit inside the raster."""


class BadSceneSpec(PolsarError):
    """A scene description is geometrically or numerically invalid."""


class RasterIOError(PolsarError):
    """A band file or its sidecar metadata is missing or unreadable."""


class SizeMismatch(RasterIOError):
    """A band file length disagrees with the metadata dimensions."""


class InternalInvariantViolation(PolsarError):
    """A quantity that is provably bounded left its bounds; indicates a bug."""
