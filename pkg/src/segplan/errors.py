"""Exception hierarchy. Every error raised by segplan derives from SegplanError."""


class SegplanError(Exception):
    pass


# ---- file parsing / IO ----

class BadMagic(SegplanError):
    """File does not carry the NIfTI-1 single-file signature."""


class UnsupportedDatatype(SegplanError):
    """NIfTI datatype code outside the supported integer/float set."""


class TruncatedFile(SegplanError):
    """Payload ends before the header-declared extent."""


class IoFailure(SegplanError):
    pass


class SchemaVersionMismatch(SegplanError):
    """Stored document carries an unknown schema version."""


# ---- geometry / validation ----

class GeometryMismatch(SegplanError):
    """Volumes expected to share shape and spacing do not."""


class MissingChannel(SegplanError):
    pass


class InconsistentChannels(SegplanError):
    """Cases in one dataset disagree on channel count."""


class NoLabel(SegplanError):
    """Operation needs a label volume and the case has none."""


class ShapeMismatch(SegplanError):
    pass


# ---- planning ----

class MissingStats(SegplanError):
    """CT normalization requested without foreground intensity statistics."""


class BudgetTooSmall(SegplanError):
    """No patch fits the memory budget even at minimal size."""


class NoConvergence(SegplanError):
    """Iterative planning exceeded its hard iteration cap."""


class TooFewResolutions(SegplanError):
    pass


# ---- preprocessing / augmentation ----

class DegenerateTarget(SegplanError):
    """Non-positive target spacing."""


class ZeroVariance(SegplanError):
    """Constant image cannot be z-scored."""


class MarginTooSmall(SegplanError):
    """Oversized crop cannot feed the requested spatial transform."""


class NotOneHot(SegplanError):
    pass


class PatchLargerThanVolume(SegplanError):
    pass


# ---- evaluation / orchestration ----

class EmptyInput(SegplanError):
    pass


class TooFewGroups(SegplanError):
    """Fewer cross-validation groups than requested folds."""
