"""Typed errors shared across the pipeline.

Every failure mode that callers are expected to branch on gets its own
class; everything inherits from SceneForgeError so CLI/service layers can
catch one base type and map it to an exit code / HTTP status.
"""


class SceneForgeError(Exception):
    """Base class for all errors raised by this package."""


# --- raster / codec errors -------------------------------------------------

class MalformedHeader(SceneForgeError):
    """PFM header is not a valid single-channel 'Pf' header."""


class NonFiniteSample(SceneForgeError):
    """A float raster contains NaN or +-Inf."""


class DimensionOverflow(SceneForgeError):
    """Declared raster dimensions exceed the supported range."""


class UnsupportedBitDepth(SceneForgeError):
    """PNG codec asked for a bit depth it does not support."""


class IoFailure(SceneForgeError):
    """Underlying file I/O failed."""


class DimensionMismatch(SceneForgeError):
    """Two rasters that must share dimensions do not."""


class ShapeMismatch(SceneForgeError):
    """Two arrays that must share shape do not."""


class OutOfRange(SceneForgeError):
    """A scalar is outside its documented domain."""


# --- geometry errors ---------------------------------------------------------

class DegenerateBox(SceneForgeError):
    """Bounding box has zero area after pixel rounding."""


class BBoxOutOfFrame(SceneForgeError):
    """Bounding box does not fit inside the raster frame."""


class EmptyMask(SceneForgeError):
    """Mask has no foreground pixels where at least one is required."""


# --- dataset errors ----------------------------------------------------------

class TooFewInstances(SceneForgeError):
    """Scene does not contain enough annotated instances."""


class InstanceMissing(SceneForgeError):
    """Requested instance id is absent from the required frames."""


class InpaintFailure(SceneForgeError):
    """Inpainting backend failed to produce a counterfactual image."""


# --- client / transport errors ------------------------------------------------

class BackendUnavailable(SceneForgeError):
    """Model backend could not be reached or returned a malformed payload."""


class BackendTimeout(BackendUnavailable):
    """Model backend did not answer within the configured timeout."""


class NoForeground(SceneForgeError):
    """Segmenter found nothing to segment."""


class UnparsableInstruction(SceneForgeError):
    """Instruction text does not match the templated grammar (mock locator)."""


class InvalidBundle(SceneForgeError):
    """Conditioning bundle fails validation."""


class PortInUse(SceneForgeError):
    """Requested service port is already bound."""
