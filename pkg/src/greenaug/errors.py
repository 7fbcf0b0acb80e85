"""Exception types shared across the toolkit."""


class GreenaugError(Exception):
    """Base class for every error raised by this package."""


class DecodeError(GreenaugError):
    """A raster file exists but cannot be decoded."""


class SpecInvalid(GreenaugError, ValueError):
    """A chroma key spec violates its invariants (e.g. tola >= tolb)."""


class DimensionMismatch(GreenaugError, ValueError):
    """Frames/mattes that must share dimensions do not."""


class OutOfBounds(GreenaugError, ValueError):
    """A pixel rectangle falls outside the frame."""


class EmptyLibrary(GreenaugError):
    """A texture library directory holds no decodable image."""


class ShapeMismatch(GreenaugError):
    """The inpaint service returned a frame of the wrong dimensions."""


class ServiceError(GreenaugError):
    """The inpaint service answered with a non-2xx status."""

    def __init__(self, status: int, message: str = ""):
        super().__init__(f"service returned {status}: {message}" if message else f"service returned {status}")
        self.status = status
        self.message = message


class ServiceTimeout(GreenaugError):
    """The inpaint service did not answer within the retry budget."""


class BindError(GreenaugError):
    """A local server could not bind its address (port in use)."""


class TaskNotFound(GreenaugError):
    """A task name is not present in the dataset index."""


class FrameNotFound(GreenaugError):
    """A (task, episode, camera, index) frame reference does not resolve."""


class JobConfigError(GreenaugError, ValueError):
    """A job configuration misses mode-required fields or holds bad values."""
