"""Exception hierarchy for the ctdskit pipeline.

Every named failure condition in the pipeline raises one of the classes
below so callers can distinguish bad inputs from genuine bugs. Invariant
violations in value-object constructors raise plain ``ValueError``.
"""


class CtdskitError(Exception):
    """Base class for all pipeline errors."""


# --- file formats and tables ---------------------------------------------

class MalformedHeaderError(CtdskitError):
    """PFM/PGM header is missing, truncated, or uses an unsupported variant."""


class DimensionMismatchError(CtdskitError):
    """Payload size or array shape disagrees with declared dimensions."""


class NonFinitePixelError(CtdskitError):
    """A depth payload contains NaN or infinite values."""


class ParseError(CtdskitError):
    """A structured document (detections JSON, manifest) is not parseable."""


class InvalidBBoxError(CtdskitError):
    """A detection bounding box leaves the normalized [0, 1] frame."""


class MissingColumnError(CtdskitError):
    """A table is missing a required header column."""


class BadNumericError(CtdskitError):
    """A table cell could not be parsed as the expected number."""


class DuplicateCameraError(CtdskitError):
    """The camera table defines the same camera_id twice."""


class MissingInputError(CtdskitError):
    """A manifest entry or required input file does not exist."""


# --- calibration ----------------------------------------------------------

class TooFewSamplesError(CtdskitError):
    """Fewer than two reference samples available for a camera."""


class DegenerateRawDepthError(CtdskitError):
    """All reference samples share one raw depth value; no curve fits."""


class InsufficientPixelsError(CtdskitError):
    """Too few non-excluded pixels to align a depth map."""


class DegenerateVarianceError(CtdskitError):
    """Retained pixels have zero variance; scale is unidentifiable."""


class MissingCurveError(CtdskitError):
    """No calibration curve available for the frame's camera."""


# --- distance extraction ---------------------------------------------------

class EmptyBoxError(CtdskitError):
    """A bounding box covers no pixels after rasterization."""


class AllPixelsZeroError(CtdskitError):
    """Every candidate depth pixel is zero (depth-model hole)."""


class EmptyMaskError(CtdskitError):
    """An instance mask has no member pixels."""


class MissingMaskError(CtdskitError):
    """Segmentation strategy requested but no mask paired to a detection."""


# --- evaluation -------------------------------------------------------------

class EmptyInputError(CtdskitError):
    """An aggregate statistic was requested over zero observations."""


class DegenerateXError(CtdskitError):
    """Regression requested with fewer than two distinct x values."""


class EmptyJoinError(CtdskitError):
    """Manual/model join produced no usable single-animal frames."""


# --- distance sampling engine -----------------------------------------------

class InfeasibleModelError(CtdskitError):
    """Detection-function parameters give g outside [0, 1] on the check grid."""


class QuadratureFailureError(CtdskitError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class NoFeasibleOptimumError(CtdskitError):
    """Every optimizer start ended infeasible or non-finite."""


class InsufficientDataError(CtdskitError):
    """Too few binned observations to fit the requested model."""


class AllFamiliesInfeasibleError(CtdskitError):
    """Model selection failed: no candidate family produced a fit."""


class MissingCameraError(CtdskitError):
    """An observation references a camera absent from the camera table."""


class ZeroEffortError(CtdskitError):
    """Total survey effort is zero; density is undefined."""


class AllReplicatesFailedError(CtdskitError):
    """Every bootstrap replicate failed to produce an estimate."""
