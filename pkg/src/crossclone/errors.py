"""Exception taxonomy for the pipeline stages."""

from __future__ import annotations


class CrosscloneError(Exception):
    """Base for every pipeline error."""


class ParseError(CrosscloneError):
    def __init__(self, file: str, position=None, message: str = ""):
        self.file = file
        self.position = position
        super().__init__(message or f"parse error in {file} at {position}")


class SynthesisError(CrosscloneError):
    """Snippet references context the synthesizer cannot resolve."""


class NoReturnCandidate(CrosscloneError):
    """No variable is defined or modified in the snippet's scope."""


class TooManyArgs(CrosscloneError):
    """Snippet needs more arguments than ARGS_MAX permits."""


class NoAccessibleMembers(CrosscloneError):
    """Object return type has no public members to expand."""


class UnsupportedType(CrosscloneError):
    """Argument descriptor outside the supported kinds."""


class StoreError(CrosscloneError):
    """Pool persistence failed or a persisted pool is corrupt."""


class PoolMismatch(CrosscloneError):
    """Profiles over different pools were compared."""


class LoadError(CrosscloneError):
    """A synthesized function never loaded in its worker."""


class MissingShim(CrosscloneError):
    def __init__(self, language: str, detail: str = ""):
        self.language = language
        super().__init__(
            f"missing shim for language '{language}'" + (f": {detail}" if detail else "")
        )


class MissingArtifacts(CrosscloneError):
    """A prior detect run's artifacts were expected but not found."""


class ConfigError(CrosscloneError):
    """Invalid run configuration."""


class InsufficientData(CrosscloneError):
    """Not enough aligned ok records to evaluate consistency."""
