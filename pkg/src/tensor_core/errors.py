class DimensionMismatchError(ValueError):
    """Raised when tensor, matrix or support dimensions do not line up."""


class TensorFormatError(ValueError):
    """Raised when a TNSR file is malformed or has an unsupported version."""
