"""Exception hierarchy shared by all lancekit modules."""

from __future__ import annotations


class LancekitError(Exception):
    """Base class for every error raised by this package."""


class IoError(LancekitError):
    """A filesystem read or write failed (wraps the underlying OSError)."""


class SchemaError(LancekitError):
    """An index file is malformed or has an unsupported schema version."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyRepoError(LancekitError):
    """The repository root contains no files for the requested language."""


class EmptyTextError(LancekitError):
    """Text to embed is empty after subtoken normalization."""


class ServiceError(LancekitError):
    """A remote service call failed after retries."""


class AuthError(LancekitError):
    """Remote service credentials are missing or rejected."""


class DimensionMismatchError(LancekitError):
    """A probe vector's dimension does not match the index dimension."""


class ParseSiteError(LancekitError):
    """The completion cursor is not positioned after `identifier.`."""


class UnresolvedReceiverError(LancekitError):
    """The receiver matches neither import bindings nor typed locals."""

    def __init__(self, receiver: str, bindings: list):
        names = ", ".join(b.local_name for b in bindings if b.local_name) or "<none>"
        super().__init__(f"cannot resolve receiver {receiver!r}; file bindings: {names}")
        self.receiver = receiver
        self.bindings = list(bindings)


class EmptyModuleError(LancekitError):
    """The resolved module or entity owns zero completion candidates."""


class QueryParseError(LancekitError):
    """Neither the language model nor the heuristic extracted anything from the query."""


class NoEntitiesError(LancekitError):
    """The vector index contains no entity entries to match against."""


class EmptyContextError(LancekitError):
    """A prompt or completion was requested for a context with zero candidates."""


class BudgetExceededError(LancekitError):
    """The configured maximum number of backend calls for this run was reached."""


class NoCallFoundError(LancekitError):
    """Model output contains no parseable call expression."""


class TaskSchemaError(LancekitError):
    """A benchmark task file is malformed; the run must abort, not shrink."""
