"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes, so keep the split between
I/O problems, bad input data, and model-level inconsistencies.
"""


class DpsimError(Exception):
    """Base class for all package errors."""


class ManifestError(DpsimError):
    """Missing or unreadable files, malformed manifests."""


class ValidationError(DpsimError):
    """Input data violates a declared contract (range, shape, profile)."""


class MalformedStreamError(DpsimError):
    """An encoded container stream is truncated or internally inconsistent."""


class ModelError(DpsimError):
    """A simulator was asked for an unsupported or inconsistent configuration."""
