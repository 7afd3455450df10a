"""Exception hierarchy shared across the pipeline."""


class CvcPipeError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatchError(CvcPipeError, ValueError):
    """Two rasters that must share a resolution do not."""


class BoundsError(CvcPipeError, ValueError):
    """Geometry falls outside the image bounds."""


class FormatError(CvcPipeError, ValueError):
    """A file does not conform to its documented format."""


class AtlasClassFileError(FormatError):
    """A prior atlas directory is missing one of its class maps."""


class AtlasResolutionError(FormatError):
    """Prior atlas maps or metadata disagree on resolution."""


class SchemaMismatchError(CvcPipeError, ValueError):
    """A feature vector's schema does not match the model's training schema."""


class ConfigError(CvcPipeError, ValueError):
    """Invalid or unknown configuration values."""


class MissingArtifactError(CvcPipeError, FileNotFoundError):
    """A pipeline stage requires an artifact that an earlier stage has not produced."""

    def __init__(self, stage, path, hint=""):
        self.stage = stage
        self.path = str(path)
        msg = f"stage '{stage}' requires missing artifact: {path}"
        if hint:
            msg += f" ({hint})"
        super().__init__(msg)


class DivergenceError(CvcPipeError, ArithmeticError):
    """Training produced a non-finite loss."""
