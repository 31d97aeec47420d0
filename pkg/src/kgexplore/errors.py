"""Exception types shared across the package."""


class KGExploreError(Exception):
    """Base class for all package errors."""


class TripleFormatError(KGExploreError, ValueError):
    """Raised for malformed raw triples or TSV lines."""


class UnknownEntityError(KGExploreError, KeyError):
    """Raised when a label does not resolve in the graph."""


class QuestionFormatError(KGExploreError, ValueError):
    """Raised for malformed question records."""


class ConsistencyError(KGExploreError, ValueError):
    """Raised when mined inputs disagree with their stated parameters."""


class TransportError(KGExploreError, RuntimeError):
    """Raised when an external policy endpoint stays unreachable after retries."""


class ConfigError(KGExploreError, ValueError):
    """Raised for invalid run configuration values."""
