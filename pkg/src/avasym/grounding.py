"""Cross-modal matching matrices and per-segment accessibility scores.

The visual-text matrix holds dot products between visual embeddings and
speech-transcript embeddings; the visual-audio matrix covers non-speech
sound.  Each matrix is min-max normalized to [0, 1] as a whole.  A segment's
raw score is the temporally weighted sum of its normalized matches across
the other modality; the weight decays by a factor of ``w`` per 5 seconds of
midpoint distance.  Speech audio is treated as accessible outright (captions
carry it into the visual modality), so its score is pinned rather than
computed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyAxis,
    FormatError,
    IndexOutOfRange,
    ShapeMismatch,
    UnknownSegment,
)
from .embedding import Embedding
from .segmentation import NON_SPEECH, PAUSE, SPEECH, AudioSegment, VisualSegment

VISUAL_TEXT = "visual_text"
VISUAL_AUDIO = "visual_audio"

DEFAULT_WEIGHT_FACTOR = 0.45
WEIGHT_PERIOD = 5.0


@dataclass(frozen=True)
class TemporalWeightConfig:
    w: float = DEFAULT_WEIGHT_FACTOR
    period: float = WEIGHT_PERIOD
    timestamp_mode: str = "midpoint"  # "midpoint" | "start"

    def __post_init__(self):
        if not 0.0 < self.w <= 1.0:
            raise ValueError("w must be in (0, 1]")
        if self.timestamp_mode not in ("midpoint", "start"):
            raise ValueError(f"unknown timestamp_mode {self.timestamp_mode!r}")

    def timestamp(self, segment) -> float:
        return segment.midpoint if self.timestamp_mode == "midpoint" else segment.start


@dataclass(frozen=True)
class MatchingMatrix:
    kind: str  # VISUAL_TEXT | VISUAL_AUDIO
    values: np.ndarray  # (n_v, n_a) floats in [0, 1]
    raw_values: np.ndarray

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    def checksum(self) -> str:
        import hashlib

        payload = json.dumps(self.values.tolist()).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


@dataclass(frozen=True)
class ScoredSegment:
    segment_id: str
    modality: str  # "visual" | "audio"
    raw_score: float
    score: float  # normalized accessibility in [0, 1]; higher = more accessible
    contributions: tuple[tuple[str, float], ...]  # (other segment id, weighted score), descending
    fixed: bool = False  # True for speech segments pinned to the accessible end


def normalize_values(raw: np.ndarray) -> np.ndarray:
    """Min-max normalize the whole matrix; a constant matrix maps to all 0.5."""
    lo, hi = float(raw.min()), float(raw.max())
    if hi == lo:
        return np.full_like(raw, 0.5)
    return (raw - lo) / (hi - lo)


def compute_matrix(visual_embeddings: list[Embedding], other_embeddings: list[Embedding],
                   kind: str) -> MatchingMatrix:
    """Dot-product matrix, min-max normalized over all cells.

    Flagged (zero) embeddings carry no signal: their cells are pinned to the
    minimum of the real dot products so they normalize to the matrix minimum.
    """
    if not visual_embeddings or not other_embeddings:
        raise EmptyAxis(f"{kind}: empty embedding axis")
    dims = {e.dim for e in visual_embeddings + other_embeddings}
    if len(dims) > 1:
        raise DimensionMismatch(f"{kind}: mixed embedding dims {sorted(dims)}")

    v = np.stack([e.vector for e in visual_embeddings])
    a = np.stack([e.vector for e in other_embeddings])
    raw = v @ a.T
    flagged = np.logical_or.outer(
        np.array([e.is_zero for e in visual_embeddings]),
        np.array([e.is_zero for e in other_embeddings]),
    )
    if flagged.all():
        raw = np.zeros_like(raw)
    elif flagged.any():
        raw = raw.copy()
        raw[flagged] = raw[~flagged].min()
    return MatchingMatrix(kind=kind, values=normalize_values(raw), raw_values=raw)


def temporal_weight(ts_i: float, ts_j: float, cfg: TemporalWeightConfig) -> float:
    return cfg.w ** (abs(ts_i - ts_j) / cfg.period)


def _sorted_contributions(entries: list[tuple[str, float, float]]) -> tuple[tuple[str, float], ...]:
    # entries: (segment_id, weighted score, start time); ties go to the earlier segment
    entries.sort(key=lambda e: (-e[1], e[2]))
    return tuple((sid, val) for sid, val, _ in entries)


def score_visual(i: int, visual_text: MatchingMatrix, visual_audio: MatchingMatrix,
                 visual_segments: list[VisualSegment], audio_segments: list[AudioSegment],
                 cfg: TemporalWeightConfig) -> ScoredSegment:
    """Weighted sum of the visual segment's matches over all audio segments.

    Speech neighbors are matched through the visual-text matrix, non-speech
    through the visual-audio matrix; pauses are never matched.
    """
    if not 0 <= i < len(visual_segments):
        raise IndexOutOfRange(f"visual index {i} out of range")
    seg = visual_segments[i]
    ts_i = cfg.timestamp(seg)
    entries = []
    total = 0.0
    for j, other in enumerate(audio_segments):
        if other.kind == PAUSE:
            continue
        matrix = visual_text if other.kind == SPEECH else visual_audio
        weighted = temporal_weight(ts_i, cfg.timestamp(other), cfg) * float(matrix.values[i, j])
        total += weighted
        entries.append((other.id, weighted, other.start))
    return ScoredSegment(
        segment_id=seg.id, modality="visual", raw_score=total, score=total,
        contributions=_sorted_contributions(entries),
    )


def score_audio(j: int, visual_audio: MatchingMatrix,
                visual_segments: list[VisualSegment], audio_segments: list[AudioSegment],
                cfg: TemporalWeightConfig, c: float = 1.0) -> ScoredSegment:
    """Score one audio segment against all visual segments.

    Speech is pinned to the constant ``c`` (normalized to 1.0 later); pauses
    score 0 and are left to the silence filter.
    """
    if not 0 <= j < len(audio_segments):
        raise IndexOutOfRange(f"audio index {j} out of range")
    seg = audio_segments[j]
    if seg.kind == SPEECH:
        return ScoredSegment(seg.id, "audio", raw_score=c, score=1.0,
                             contributions=(), fixed=True)
    if seg.kind == PAUSE:
        return ScoredSegment(seg.id, "audio", raw_score=0.0, score=0.0, contributions=())
    ts_j = cfg.timestamp(seg)
    entries = []
    total = 0.0
    for i, other in enumerate(visual_segments):
        weighted = temporal_weight(cfg.timestamp(other), ts_j, cfg) * float(visual_audio.values[i, j])
        total += weighted
        entries.append((other.id, weighted, other.start))
    return ScoredSegment(
        segment_id=seg.id, modality="audio", raw_score=total, score=total,
        contributions=_sorted_contributions(entries),
    )


def normalize_scores(scored: list[ScoredSegment], modality: str) -> list[ScoredSegment]:
    """Min-max normalize raw scores within one modality.

    Pinned (speech) scores stay out of the min/max pool and clamp to 1.0; a
    constant pool maps to 0.5.
    """
    pool = [s.raw_score for s in scored if not s.fixed and s.modality == modality]
    lo, hi = (min(pool), max(pool)) if pool else (0.0, 0.0)
    out = []
    for s in scored:
        if s.modality != modality:
            out.append(s)
        elif s.fixed:
            out.append(replace(s, score=1.0))
        elif hi == lo:
            out.append(replace(s, score=0.5))
        else:
            out.append(replace(s, score=(s.raw_score - lo) / (hi - lo)))
    return out


def top_matches(scored: dict[str, ScoredSegment], segment_id: str, k: int) -> list[tuple[str, float]]:
    """The k strongest contributions for a segment, strongest first."""
    if segment_id not in scored:
        raise UnknownSegment(segment_id)
    if k < 0:
        raise ValueError("k must be non-negative")
    return list(scored[segment_id].contributions[:k])


def load_matrix_file(path: str, n_v: int, n_a: int) -> tuple[MatchingMatrix, MatchingMatrix]:
    """Load precomputed visual-text and visual-audio matrices.

    Sections flagged ``raw`` are normalized here; sections flagged normalized
    must already lie in [0, 1].
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("version") != 1:
        raise FormatError(f"{path}: unsupported matrix file version")

    declared_nv, declared_na = doc.get("n_v"), doc.get("n_a")
    if declared_nv != n_v or declared_na != n_a:
        raise ShapeMismatch(
            f"{path}: file declares {declared_nv}x{declared_na}, video has {n_v}x{n_a}"
        )

    def section(kind: str) -> MatchingMatrix:
        try:
            block = doc[kind]
            raw_flag = bool(block["raw"])
            values = np.asarray(block["values"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}: bad {kind} section: {exc}") from exc
        if values.ndim != 2 or values.shape != (n_v, n_a):
            raise ShapeMismatch(f"{path}: {kind} is {values.shape}, expected {(n_v, n_a)}")
        if raw_flag:
            return MatchingMatrix(kind=kind, values=normalize_values(values), raw_values=values)
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise FormatError(f"{path}: {kind} marked normalized but has values outside [0, 1]")
        return MatchingMatrix(kind=kind, values=values, raw_values=values)

    return section(VISUAL_TEXT), section(VISUAL_AUDIO)


__all__ = [
    "DEFAULT_WEIGHT_FACTOR",
    "MatchingMatrix",
    "ScoredSegment",
    "TemporalWeightConfig",
    "VISUAL_AUDIO",
    "VISUAL_TEXT",
    "WEIGHT_PERIOD",
    "compute_matrix",
    "load_matrix_file",
    "normalize_scores",
    "normalize_values",
    "score_audio",
    "score_visual",
    "temporal_weight",
    "top_matches",
]
