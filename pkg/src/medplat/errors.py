"""Exception hierarchy shared across the platform modules."""


class PlatformError(Exception):
    """Base class for all domain errors raised by this package."""


class ParseError(PlatformError):
    """Malformed input file or line; carries location where known."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ValidationError(PlatformError):
    """Structurally valid input violating a domain invariant."""


class NotFoundError(PlatformError):
    """Lookup by id failed."""


class ArgumentError(PlatformError):
    """Caller-supplied argument outside the operation's precondition."""


class SchemaError(PlatformError):
    """Row data missing a declared field."""


class FormatError(PlatformError):
    """Persistence file header/body does not match the expected format."""


class UndefinedSimilarityError(PlatformError):
    """Cosine similarity requested against an all-zero vector."""


class EmptyDictionaryError(PlatformError):
    """Terminology mapping attempted against an empty (filtered) dictionary."""


class GatewayError(PlatformError):
    """Text-generation gateway failure (transport, status, or egress denial)."""


class BusySessionError(PlatformError):
    """Concurrent chat attempted on a single-writer session."""
