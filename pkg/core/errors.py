class CubeLabError(Exception):
    """Base class for every error raised by the lab."""


class DimensionError(CubeLabError, ValueError):
    """A point, DNF or function has the wrong number of coordinates."""


class CoordinateError(CubeLabError, ValueError):
    """A coordinate, coordinate set or permutation is invalid for the dimension."""


class CapExceededError(CubeLabError, ValueError):
    """The request is larger than an exact-mode or oracle cap."""


class SpecError(CubeLabError, ValueError):
    """Malformed function descriptor, DNF text or shift specification."""


class PreconditionError(CubeLabError, ValueError):
    """A mathematical precondition of an operation does not hold."""


class CertificationError(CubeLabError, RuntimeError):
    """A certified result failed its exact verification."""
