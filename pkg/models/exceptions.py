"""
Exception hierarchy shared by every InsMix package
"""


class InsMixError(Exception):
    """Base class for all InsMix failures"""


class ConfigError(InsMixError):
    """A configuration violates one of its invariants"""


class DatasetIOError(InsMixError):
    """Reading or writing an image / label map / cache file failed"""


class DimensionMismatchError(InsMixError):
    """Image and label map extents disagree"""


class UnsupportedFormatError(InsMixError):
    """File is readable but not in an accepted mode or bit depth"""


class EmptyBankError(InsMixError):
    """The dataset holds no instance to build a bank from"""


class NoCandidateError(InsMixError):
    """No bank entry satisfies the template filter"""


class EmptyMaskError(InsMixError):
    """A constraint function received a mask with zero pixels"""


class NoAnchorError(InsMixError):
    """The image has no original instance to anchor placements on"""


class OutOfBoundsError(InsMixError):
    """A placement or rectangle leaves the image"""


class ShapeError(InsMixError):
    """Tensor or image extents are incompatible with an operation"""


class NonFiniteError(InsMixError):
    """A forward value or loss became NaN or infinite"""


class SpectralError(InsMixError):
    """Spectral norm is undefined (zero matrix)"""


class NoOriginalRegionError(InsMixError):
    """FSE has template positions but no original-instance positions"""


class MissingCheckpointError(InsMixError):
    """Smoothing was requested without generator weights"""


class MissingArtifactError(InsMixError):
    """A manifest, output or input file expected by verify/replay is absent"""


class CheckpointFormatError(InsMixError):
    """Checkpoint file is truncated or has the wrong magic"""
