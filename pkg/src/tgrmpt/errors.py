"""Exception and warning types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""


# ---- core validation ----

class DegenerateBox(ToolkitError):
    """Bounding box with non-positive width or height."""


class NonFiniteValue(ToolkitError):
    """NaN or infinity where a finite number is required."""


class DuplicateEntry(ToolkitError):
    """Two boxes stored for the same (frame, id) key."""


# ---- assignment ----

class NonFiniteCost(ToolkitError):
    """Cost matrix contains NaN or infinity."""


# ---- fusion ----

class MixedFrames(ToolkitError):
    """Detections from different frames passed to a per-frame operation."""


class WrongKind(ToolkitError):
    """Detection kind does not match the expected stream (wb vs hs)."""


# ---- descriptor ----

class DimensionMismatch(ToolkitError):
    """Embedding dimensions disagree."""


class EmptyGallery(ToolkitError):
    """Distance requested against a track with no stored descriptors."""


class ZeroDescriptorWarning(UserWarning):
    """A fused descriptor came out all-zero; cosine against it is pinned to 0."""


# ---- tracker ----

class FrameOrderViolation(ToolkitError):
    """Observations are not from the frame immediately after the cursor."""


class MissingEmbedding(ToolkitError):
    """A detection has no embedding record keyed by its det_id."""


# ---- metrics ----

class EmptyGroundTruth(ToolkitError):
    """Metrics requested against a ground truth with no detections."""


# ---- synth ----

class InvalidSpec(ToolkitError):
    """Scenario specification violates its invariants."""


class ScriptOutOfRange(ToolkitError):
    """Id script references frames or identities outside the ground truth."""


# ---- io ----

class ParseError(ToolkitError):
    """Malformed input file; message carries path and line number."""


class DuplicateDetId(ToolkitError):
    """det_id appears twice in one detection file."""


class BadMagic(ToolkitError):
    """Embedding file does not start with the TGRE magic bytes."""


class TruncatedRecord(ToolkitError):
    """Embedding file ends in the middle of a record."""


class DimMismatch(ToolkitError):
    """Embedding file dimension is invalid or differs from the expected one."""


class IoFailure(ToolkitError):
    """Underlying OS write failed."""
