"""Exception types shared by the pipeline, project store, and HTTP service.

Every error carries a stable ``code`` string; the HTTP layer maps codes to
status classes, so the codes below form the closed set documented in
docs/api.md.
"""

from __future__ import annotations


class AvasymError(Exception):
    code = "internal"

    def __init__(self, message: str = "", detail=None):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.detail = detail
        self.stage: str | None = None  # set when raised inside a pipeline stage


# --- ingest ---------------------------------------------------------------

class MissingPart(AvasymError):
    code = "missing_part"


class MalformedPart(AvasymError):
    code = "malformed_part"


class DurationMismatch(AvasymError):
    code = "duration_mismatch"


class DecoderUnavailable(AvasymError):
    code = "decoder_unavailable"


class DecodeFailed(AvasymError):
    code = "decode_failed"


# --- segmentation ----------------------------------------------------------

class EmptyFrames(AvasymError):
    code = "empty_frames"


class OverlappingWords(AvasymError):
    code = "overlapping_words"


# --- embedding -------------------------------------------------------------

class NoFrames(AvasymError):
    code = "no_frames"


class WrongKind(AvasymError):
    code = "wrong_kind"


class DimensionMismatch(AvasymError):
    code = "dimension_mismatch"


class MissingSegment(AvasymError):
    code = "missing_segment"


# --- grounding -------------------------------------------------------------

class EmptyAxis(AvasymError):
    code = "empty_axis"


class IndexOutOfRange(AvasymError):
    code = "index_out_of_range"


class UnknownSegment(AvasymError):
    code = "unknown_segment"


class ShapeMismatch(AvasymError):
    code = "shape_mismatch"


# --- postprocess / project lifecycle ----------------------------------------

class TauOutOfRange(AvasymError):
    code = "tau_out_of_range"


class UnknownIssue(AvasymError):
    code = "unknown_issue"


class AlreadyAddressed(AvasymError):
    code = "already_addressed"


class DuplicateIssue(AvasymError):
    code = "duplicate_issue"


class EmptyText(AvasymError):
    code = "empty_text"


class LifecycleViolation(AvasymError):
    code = "lifecycle_violation"


class ScoreOutOfRange(AvasymError):
    code = "score_out_of_range"


# --- serialization -----------------------------------------------------------

class FormatError(AvasymError):
    code = "format_error"


class VersionUnsupported(AvasymError):
    code = "version_unsupported"


# --- service -----------------------------------------------------------------

class UnknownProject(AvasymError):
    code = "unknown_project"


class StaleRevision(AvasymError):
    code = "stale_revision"


class InvalidRequest(AvasymError):
    code = "invalid_request"
