"""Exception types shared across the toolkit."""


class DocasdError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(DocasdError):
    """An argument violates a documented precondition or invariant."""


class InfeasiblePath(InvalidInput):
    """No alignment path satisfies the requested endpoint constraints."""


class EmptyDocument(InvalidInput):
    """The document is empty after whitespace trimming."""


class SegmenterBackendError(DocasdError):
    """An external segmenter failed or produced output that cannot be
    mapped back onto the document."""


class MetricContractError(DocasdError):
    """A scoring request violates the metric's contract (missing reference,
    unknown oracle pair, reference passed to a reference-free metric, ...)."""


class ScorerUnavailable(DocasdError):
    """The remote scoring service could not be reached after retries."""


class OracleTooLarge(DocasdError):
    """The exhaustive path search would enumerate too many paths."""


class WindowTooLarge(InvalidInput):
    """Chunk size k exceeds the number of aligned sentences."""


class DegenerateInput(InvalidInput):
    """Correlation is undefined for this input (zero variance or too short)."""


class DataError(DocasdError):
    """A corpus, report or fixture file failed to parse or validate."""


class RecordSkipped(DocasdError):
    """A corpus record could not be processed; carries the reason."""

    def __init__(self, doc_id: str, reason: str):
        super().__init__(f"record {doc_id!r} skipped: {reason}")
        self.doc_id = doc_id
        self.reason = reason
