"""Exception taxonomy shared across the pipeline.

Every error raised by this package derives from :class:`BioragError`.
Pipeline orchestration (``engine.ask``) tags exceptions with the stage
that produced them via the ``stage`` attribute.
"""

from __future__ import annotations


class BioragError(Exception):
    """Base class for all errors raised by this package."""

    #: Pipeline stage label, set by the orchestrator when an error
    #: propagates out of a named stage ("embed", "search", ...).
    stage: str | None = None


# --- ingestion ---------------------------------------------------------


class UnreadableFile(BioragError):
    pass


class MalformedRecord(BioragError):
    def __init__(self, record_index: int, detail: str):
        super().__init__(f"record {record_index}: {detail}")
        self.record_index = record_index


class EmptyAfterNormalization(BioragError):
    pass


class IoFailure(BioragError):
    pass


class SchemaViolation(BioragError):
    def __init__(self, detail: str, line: int | None = None):
        super().__init__(detail if line is None else f"line {line}: {detail}")
        self.line = line


# --- chunking ----------------------------------------------------------


class InvalidConfig(BioragError):
    pass


# --- embedding ---------------------------------------------------------


class EmptyInput(BioragError):
    pass


class ProviderUnreachable(BioragError):
    pass


class DimensionMismatch(BioragError):
    pass


class MalformedResponse(BioragError):
    pass


class HttpError(BioragError):
    def __init__(self, status: int, detail: str = ""):
        super().__init__(f"HTTP {status}" + (f": {detail}" if detail else ""))
        self.status = status


# --- vector index ------------------------------------------------------


class DuplicateChunkId(BioragError):
    pass


class EmptyIndex(BioragError):
    pass


class FormatVersionMismatch(BioragError):
    pass


class CorruptFile(BioragError):
    pass


class FingerprintMismatch(BioragError):
    pass


# --- generation --------------------------------------------------------


class EmptyQuery(BioragError):
    pass


class BackendUnreachable(BioragError):
    pass


class BackendError(BioragError):
    def __init__(self, status: int, body: str = ""):
        super().__init__(f"backend returned {status}: {body[:200]}")
        self.status = status
        self.body = body


class EmptyCompletion(BioragError):
    pass


# --- evaluation --------------------------------------------------------


class EmptyMatrix(BioragError):
    pass


class RowNotNormalized(BioragError):
    pass
