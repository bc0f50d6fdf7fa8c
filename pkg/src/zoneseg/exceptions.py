"""Exception hierarchy shared by the whole package.

``ValidationError`` covers malformed inputs and broken invariants (the CLI
maps it to exit code 2); ``ServiceError`` covers transport and remote
failures (exit code 1).
"""


class ZonesegError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ZonesegError):
    """Invalid input data, configuration, or violated invariant."""


class CorpusParseError(ValidationError):
    """A corpus file could not be parsed; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class LembError(ValidationError):
    """Base class for embedding-file format errors."""


class LembMagicError(LembError):
    """The file does not start with the expected magic bytes."""


class LembVersionError(LembError):
    """The file declares an unsupported format version."""


class LembTruncatedError(LembError):
    """The payload size disagrees with the declared row count."""


class LembIndexError(LembError):
    """The sidecar index disagrees with the embedding file."""


class ServiceError(ZonesegError):
    """An embedding service request failed (transport, status, or payload)."""


class DimensionMismatchError(ValidationError):
    """Vector dimension differs from the declared or expected dimension."""
