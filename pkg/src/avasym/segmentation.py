"""Split the visual track into shots and the audio track into
speech / non-speech / pause segments.

Shot cuts are placed wherever the mean absolute HSV difference between
adjacent sampled frames exceeds a threshold.  Audio segmentation classifies
the gaps between word timings: a gap of at least NON_SPEECH_GAP seconds is a
non-speech segment, a gap of at least PAUSE_GAP (but shorter) is a pause, and
words separated by anything smaller merge into one speech segment.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import EmptyFrames, OverlappingWords
from .ingest import FrameSeries, WordTiming

SPEECH = "speech"
NON_SPEECH = "non_speech"
PAUSE = "pause"
AUDIO_KINDS = (SPEECH, NON_SPEECH, PAUSE)

DEFAULT_CONTENT_THRESHOLD = 27.0
NON_SPEECH_GAP = 2.0  # gaps at least this long become non-speech segments
PAUSE_GAP = 0.5  # gaps in [PAUSE_GAP, NON_SPEECH_GAP) become pauses


@dataclass(frozen=True)
class VisualSegment:
    id: str
    index: int
    start: float
    end: float
    representative_frames: tuple[int, ...]

    @property
    def midpoint(self) -> float:
        return (self.start + self.end) / 2.0


@dataclass(frozen=True)
class AudioSegment:
    id: str
    index: int
    start: float
    end: float
    kind: str
    transcript: str = ""

    @property
    def midpoint(self) -> float:
        return (self.start + self.end) / 2.0


def frame_delta(a: np.ndarray, b: np.ndarray) -> float:
    """Mean absolute per-pixel, per-channel HSV difference on the 0-255 scale."""
    return float(np.abs(a.astype(np.int16) - b.astype(np.int16)).mean())


def detect_shots(frames: FrameSeries, content_threshold: float = DEFAULT_CONTENT_THRESHOLD,
                 duration: float | None = None) -> list[VisualSegment]:
    """Place a cut between adjacent frames whose delta exceeds the threshold.

    Returned segments tile [0, duration]; ``duration`` defaults to one frame
    period past the last frame.
    """
    if not frames.frames:
        raise EmptyFrames("no frames to segment")
    if content_threshold <= 0:
        raise ValueError("content_threshold must be positive")
    if duration is None:
        duration = frames.frames[-1].t + 1.0 / frames.fps

    boundaries = [0.0]
    for prev, cur in zip(frames.frames, frames.frames[1:]):
        if frame_delta(prev.hsv, cur.hsv) > content_threshold:
            if 0.0 < cur.t < duration:
                boundaries.append(cur.t)
    boundaries.append(duration)

    segments = []
    for index, (start, end) in enumerate(zip(boundaries, boundaries[1:])):
        reps = tuple(
            i for i, f in enumerate(frames.frames)
            if start <= f.t < end or (end == duration and f.t == duration)
        )
        segments.append(VisualSegment(
            id=f"vis-{index:04d}", index=index, start=start, end=end,
            representative_frames=reps,
        ))
    return segments


def _classify_gap(length: float) -> str:
    # a degenerate all-covering gap shorter than PAUSE_GAP still has to be
    # covered by something; non-speech is the least wrong label
    if length >= NON_SPEECH_GAP:
        return NON_SPEECH
    if length >= PAUSE_GAP:
        return PAUSE
    return NON_SPEECH


def segment_audio(words: list[WordTiming] | tuple[WordTiming, ...],
                  duration: float) -> list[AudioSegment]:
    """Classify inter-word gaps and merge close words into speech segments.

    Leading/trailing spans count as gaps from t=0 / to t=duration.  A
    boundary gap shorter than PAUSE_GAP cannot stand alone as a segment, so
    it is absorbed into the adjacent speech segment to keep the timeline
    tiled.
    """
    for prev, cur in zip(words, words[1:]):
        if cur.start < prev.end:
            raise OverlappingWords(f"{prev.word!r} and {cur.word!r} overlap")

    if not words:
        return [AudioSegment(id="aud-0000", index=0, start=0.0, end=duration,
                             kind=_classify_gap(duration))]

    # group words into runs separated by gaps >= PAUSE_GAP
    runs: list[list[WordTiming]] = [[words[0]]]
    for w in words[1:]:
        if w.start - runs[-1][-1].end < PAUSE_GAP:
            runs[-1].append(w)
        else:
            runs.append([w])

    raw: list[tuple[float, float, str, str]] = []  # (start, end, kind, transcript)
    leading = runs[0][0].start
    if leading >= PAUSE_GAP:
        raw.append((0.0, leading, _classify_gap(leading), ""))

    for i, run in enumerate(runs):
        start, end = run[0].start, run[-1].end
        if i == 0 and leading < PAUSE_GAP:
            start = 0.0
        if i == len(runs) - 1 and duration - run[-1].end < PAUSE_GAP:
            end = duration
        raw.append((start, end, SPEECH, " ".join(w.word for w in run)))
        if i + 1 < len(runs):
            gap_end = runs[i + 1][0].start
            raw.append((run[-1].end, gap_end, _classify_gap(gap_end - run[-1].end), ""))

    trailing = duration - runs[-1][-1].end
    if trailing >= PAUSE_GAP:
        raw.append((runs[-1][-1].end, duration, _classify_gap(trailing), ""))

    return [
        AudioSegment(id=f"aud-{i:04d}", index=i, start=s, end=e, kind=k, transcript=t)
        for i, (s, e, k, t) in enumerate(raw)
    ]


def assign_transcripts(segments: list[AudioSegment],
                       words: list[WordTiming] | tuple[WordTiming, ...]) -> list[AudioSegment]:
    """Re-derive each speech segment's transcript by the word-midpoint rule."""
    out = []
    for seg in segments:
        if seg.kind != SPEECH:
            out.append(replace(seg, transcript=""))
            continue
        inside = [w.word for w in words if seg.start <= (w.start + w.end) / 2.0 < seg.end]
        out.append(replace(seg, transcript=" ".join(inside)))
    return out


__all__ = [
    "AUDIO_KINDS",
    "AudioSegment",
    "DEFAULT_CONTENT_THRESHOLD",
    "NON_SPEECH",
    "NON_SPEECH_GAP",
    "PAUSE",
    "PAUSE_GAP",
    "SPEECH",
    "VisualSegment",
    "assign_transcripts",
    "detect_shots",
    "frame_delta",
    "segment_audio",
]
