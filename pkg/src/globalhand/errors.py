"""Exception hierarchy shared across the package."""


class GlobalHandError(ValueError):
    """Base class for every error raised by this package."""


class InvalidPoseError(GlobalHandError):
    pass


class DomainError(GlobalHandError):
    """A point lies outside the domain of a camera-space mapping."""


class BehindCameraError(DomainError):
    pass


class DegenerateError(GlobalHandError):
    pass


class DegeneratePoseError(DegenerateError):
    pass


class DegenerateKeyBoneError(DegenerateError):
    """Both key-bone candidates are too short in the image to be resolved."""


class DegenerateGeometryError(DegenerateError):
    """The secondary joint's ray is (numerically) collinear with the root ray."""


class InconsistentInputsError(GlobalHandError):
    """2D and canonical inputs imply a root behind the camera."""


class NoContrastError(GlobalHandError):
    pass


class MetricError(GlobalHandError):
    pass


class LossUnavailableError(MetricError):
    pass


class FitError(GlobalHandError):
    pass


class OrderingError(GlobalHandError):
    pass


class SchemaError(GlobalHandError):
    pass


class ParseError(GlobalHandError):
    pass


class AlignmentError(GlobalHandError):
    pass
