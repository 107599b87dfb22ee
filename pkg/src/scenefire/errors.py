"""Exception types shared across the package."""


class SceneFireError(Exception):
    """Base class for all scenefire errors."""


class InvalidInputError(SceneFireError, ValueError):
    """An input image, kernel, or record violates a documented precondition."""


class InvalidParameterError(SceneFireError, ValueError):
    """A numeric parameter is outside its legal range."""


class UnsupportedImageError(InvalidInputError):
    """The image file is not a PNG or JPEG, or cannot be decoded."""


class InvalidKeypointError(InvalidInputError):
    """The configuration keypoint sits too close to the image border."""


class ConfigurationFailedError(SceneFireError):
    """No tuple passed the selection threshold; the prototype region is featureless."""


class CorruptFilterError(SceneFireError):
    """A filter carries no usable prototype response and cannot be normalized."""


class InvalidSequenceError(InvalidInputError):
    """Frame timestamps are not in non-decreasing order."""


class BankFormatError(SceneFireError):
    """A filter-bank file is malformed; the message carries field context."""


class BankVersionError(BankFormatError):
    """A filter-bank file declares an unsupported format version."""
