"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class NyayaError(Exception):
    """Base class for all engine errors."""


class IngestError(NyayaError):
    """A corpus record could not be ingested (strict mode only)."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class ChunkingError(NyayaError):
    """Document cannot be chunked (empty body or bad window parameters)."""


class EmbeddingError(NyayaError):
    """Text cannot be embedded (empty input, bad provider payload)."""


class TransportError(NyayaError):
    """A remote provider call failed in a way the caller may retry."""

    def __init__(self, message: str, retryable: bool = True):
        super().__init__(message)
        self.retryable = retryable


class VectorIndexError(NyayaError):
    """Base for index construction/search failures."""


class DimensionMismatchError(VectorIndexError):
    pass


class DuplicateChunkIdError(VectorIndexError):
    pass


class CorruptIndexError(VectorIndexError):
    """Index file failed validation; `offset` is the byte where parsing stopped."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class ClassifierError(NyayaError):
    """Classification precondition failed (e.g. empty query)."""


class RetrievalUnavailableError(NyayaError):
    """No searchable index is available; the caller decides the fallback."""


class GatewayError(NyayaError):
    """Chat provider failure after retries were exhausted."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class ScriptMissError(GatewayError):
    """Scripted provider had no matching entry and no default."""


class RuleFileError(NyayaError):
    """Compliance rule file failed validation; service must refuse to start."""


class SessionNotFoundError(NyayaError):
    pass


class StorageError(NyayaError):
    """Session storage I/O failure; `retryable` marks transient conditions."""

    def __init__(self, message: str, retryable: bool = False):
        super().__init__(message)
        self.retryable = retryable


class EvalInputError(NyayaError):
    """Evaluation inputs are malformed (length mismatch, undefined f1)."""
