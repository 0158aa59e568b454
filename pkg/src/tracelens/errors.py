"""Exception types shared across the package.

Every error carries a stable ``code`` string so the HTTP layer and the CLI
can report failures uniformly.
"""

from __future__ import annotations


class TraceLensError(Exception):
    """Base class for all errors raised by this package."""

    code = "internal"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ParseError(TraceLensError):
    """Subject source does not parse."""

    code = "parse-error"

    def __init__(self, message: str, filename: str = "<subject>", line: int | None = None):
        super().__init__(message)
        self.filename = filename
        self.line = line


class SpecValidationError(TraceLensError):
    """One or more trace-spec targets failed to validate.

    ``errors`` holds `SpecError` items (see model.py) so callers can report
    every offending target, not just the first.
    """

    code = "invalid-spec"

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(e.message for e in self.errors) or "invalid trace spec")


class UnsupportedConstruct(TraceLensError):
    """Subject uses a construct the rewriter cannot instrument safely."""

    code = "unsupported-construct"

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class EmitError(TraceLensError):
    """Internal inconsistency while emitting instrumented source."""

    code = "emit-error"


class MalformedTrace(TraceLensError):
    """Trace file violates the hierarchical schema."""

    code = "malformed-trace"


class StackMismatch(TraceLensError):
    """An exit/end hook does not match any open block: instrumentation bug."""

    code = "stack-mismatch"


class TraceTooLarge(TraceLensError):
    """Event cap exceeded; recording stops and the trace is truncated."""

    code = "trace-too-large"


class SinkIOError(TraceLensError):
    """Trace file could not be written."""

    code = "sink-io-error"


class SchemaViolation(TraceLensError):
    """Relational ingest received data that breaks table invariants."""

    code = "schema-violation"


class UnknownName(TraceLensError):
    code = "unknown-name"


class UnknownBlock(TraceLensError):
    code = "unknown-block"


class UnknownVariable(TraceLensError):
    code = "unknown-variable"


class NotATrackedBlock(TraceLensError):
    code = "not-a-tracked-block"


class Incompatible(TraceLensError):
    """Variables cannot be joined 1-1 under any common ancestor."""

    code = "incompatible-join"

    def __init__(self, message: str, pair: tuple[str, str] | None = None):
        super().__init__(message)
        self.pair = pair


class TooManyGroups(TraceLensError):
    code = "too-many-groups"


class InvalidPlotKind(TraceLensError):
    """Requested plot kind is not admissible for the query's signature."""

    code = "invalid-plot-kind"


class SessionStateError(TraceLensError):
    """Operation not valid for the session's current status."""

    code = "session-state"


class SubjectCrash(TraceLensError):
    """Subject program failed so early that no trace was produced."""

    code = "subject-crash"
