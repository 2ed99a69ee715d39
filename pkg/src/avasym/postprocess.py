"""False-positive filters and issue surfacing.

Two kinds of detections need no description and are suppressed rather than
surfaced: visual segments dominated by an on-camera face (the voice already
carries them) and near-silent audio.  Everything else below the surfacing
threshold becomes an open issue.  Filters only ever change issue status,
never scores.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .errors import TauOutOfRange, WrongKind
from .ingest import AudioTrack, FaceSidecar
from .segmentation import NON_SPEECH, PAUSE, SPEECH, AudioSegment, VisualSegment
from .grounding import ScoredSegment

log = logging.getLogger(__name__)

DEFAULT_TH_PRESENTER = 58000.0  # px^2 per second, calibrated at 1280x720
DEFAULT_TH_SILENCE = 0.007
DEFAULT_TAU = 0.35
REFERENCE_FRAME_AREA = 1280 * 720

SILENCE_WINDOW = 0.05  # seconds per RMS window

OPEN = "open"
ADDRESSED = "addressed"
DISMISSED = "dismissed"
SUPPRESSED_PRESENTER = "suppressed_presenter"
SUPPRESSED_SILENCE = "suppressed_silence"
ISSUE_STATUSES = (OPEN, ADDRESSED, DISMISSED, SUPPRESSED_PRESENTER, SUPPRESSED_SILENCE)


@dataclass(frozen=True)
class FilterConfig:
    th_presenter: float = DEFAULT_TH_PRESENTER
    th_silence: float = DEFAULT_TH_SILENCE
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        if self.th_presenter < 0 or self.th_silence < 0:
            raise ValueError("thresholds must be non-negative")
        if not 0.0 <= self.tau <= 1.0:
            raise TauOutOfRange(f"tau must be in [0, 1], got {self.tau}")


@dataclass
class Issue:
    issue_id: str
    segment_id: str
    modality: str  # "visual" | "audio"
    score: float
    status: str
    created_from: str = "auto"  # "auto" | "manual"


def presenter_metric(segment: VisualSegment, faces: FaceSidecar | None) -> float:
    """Largest face box area per sampled timestamp, summed and divided by
    segment length (px^2/s).  Without a sidecar the filter is disabled."""
    if faces is None:
        log.warning("no face sidecar; presenter filter disabled for %s", segment.id)
        return 0.0
    total = 0.0
    for entry in faces.entries:
        if segment.start <= entry.t < segment.end and entry.boxes:
            total += max(w * h for _, _, w, h in entry.boxes)
    length = segment.end - segment.start
    return total / length if length > 0 else 0.0


def effective_presenter_threshold(filters: FilterConfig, faces: FaceSidecar | None) -> float:
    """Scale the px^2/s threshold to the sidecar's resolution.

    The default constant assumes 1280x720; for other resolutions the
    equivalent fraction-of-frame-area rule is applied by scaling.
    """
    if faces is None:
        return filters.th_presenter
    area = faces.frame_width * faces.frame_height
    if area == REFERENCE_FRAME_AREA:
        return filters.th_presenter
    return filters.th_presenter * (area / REFERENCE_FRAME_AREA)


def silence_metric(segment: AudioSegment, audio: AudioTrack) -> float:
    """Mean RMS amplitude over 50 ms windows of the segment."""
    if segment.kind == SPEECH:
        raise WrongKind("silence metric is undefined for speech segments")
    samples = audio.slice(segment.start, segment.end)
    if samples.size == 0:
        return 0.0
    win = max(1, int(round(SILENCE_WINDOW * audio.sample_rate)))
    rms = [
        float((samples[i:i + win] ** 2).mean()) ** 0.5
        for i in range(0, samples.size, win)
    ]
    return float(sum(rms) / len(rms))


@dataclass(frozen=True)
class FilterOutcome:
    issues: list[Issue]
    presenter_metrics: dict[str, float]  # visual segment id -> px^2/s
    silence_metrics: dict[str, float]  # audio segment id -> mean RMS


def surface_issues(scored_visual: list[ScoredSegment], scored_audio: list[ScoredSegment],
                   visual_segments: list[VisualSegment], audio_segments: list[AudioSegment],
                   filters: FilterConfig, faces: FaceSidecar | None,
                   audio: AudioTrack) -> FilterOutcome:
    """Turn normalized scores into the initial issue set.

    Visual segments below tau become issues (open, or suppressed when the
    presenter metric exceeds its threshold).  Every non-speech and pause
    audio segment becomes an issue regardless of score, because synchronous
    sounds must be captioned either way; near-silent ones are suppressed.
    """
    visual_by_id = {s.id: s for s in visual_segments}
    audio_by_id = {s.id: s for s in audio_segments}
    th_presenter = effective_presenter_threshold(filters, faces)

    presenter_metrics = {
        seg.id: presenter_metric(seg, faces) for seg in visual_segments
    }
    silence_metrics = {
        seg.id: silence_metric(seg, audio)
        for seg in audio_segments if seg.kind != SPEECH
    }

    issues: list[Issue] = []
    for scored in scored_visual:
        if scored.score >= filters.tau:
            continue
        seg = visual_by_id[scored.segment_id]
        suppressed = presenter_metrics[seg.id] > th_presenter
        issues.append(Issue(
            issue_id=f"iss-{seg.id}", segment_id=seg.id, modality="visual",
            score=scored.score,
            status=SUPPRESSED_PRESENTER if suppressed else OPEN,
        ))
    for scored in scored_audio:
        seg = audio_by_id[scored.segment_id]
        if seg.kind == SPEECH:
            continue
        suppressed = silence_metrics[seg.id] < filters.th_silence
        issues.append(Issue(
            issue_id=f"iss-{seg.id}", segment_id=seg.id, modality="audio",
            score=scored.score,
            status=SUPPRESSED_SILENCE if suppressed else OPEN,
        ))
    return FilterOutcome(issues=issues, presenter_metrics=presenter_metrics,
                         silence_metrics=silence_metrics)


def refilter(project, tau: float, th_presenter: float | None = None,
             th_silence: float | None = None) -> None:
    """Recompute the auto issue set against a new threshold configuration.

    Auto visual issues exist exactly for segments scoring below tau; the
    addressed/dismissed status of surviving issues is kept, manual issues are
    untouched, and audio issue suppression is re-derived from the stored
    silence metrics when that threshold changes.  Dropping an auto issue
    never deletes annotations.
    """
    if not 0.0 <= tau <= 1.0:
        raise TauOutOfRange(f"tau must be in [0, 1], got {tau}")
    old = project.filter_config
    filters = FilterConfig(
        th_presenter=old.th_presenter if th_presenter is None else th_presenter,
        th_silence=old.th_silence if th_silence is None else th_silence,
        tau=tau,
    )

    th_p = filters.th_presenter
    if project.faces_frame_area and project.faces_frame_area != REFERENCE_FRAME_AREA:
        th_p = th_p * (project.faces_frame_area / REFERENCE_FRAME_AREA)

    existing = {issue.segment_id: issue for issue in project.issues}
    rebuilt: list[Issue] = []
    for scored in project.scored_visual:
        seg_id = scored.segment_id
        prior = existing.pop(seg_id, None)
        if prior is not None and prior.created_from == "manual":
            rebuilt.append(prior)
            continue
        if scored.score >= filters.tau:
            continue  # the prior auto issue (any status) drops out
        if prior is not None and prior.status in (ADDRESSED, DISMISSED):
            rebuilt.append(prior)
            continue
        metric = project.presenter_metrics.get(seg_id, 0.0)
        status = SUPPRESSED_PRESENTER if metric > th_p else OPEN
        rebuilt.append(Issue(
            issue_id=f"iss-{seg_id}", segment_id=seg_id, modality="visual",
            score=scored.score, status=status,
        ))
    for issue in existing.values():
        if issue.modality != "audio":
            continue
        if issue.status in (ADDRESSED, DISMISSED) or issue.created_from == "manual":
            rebuilt.append(issue)
            continue
        metric = project.silence_metrics.get(issue.segment_id, 0.0)
        issue.status = SUPPRESSED_SILENCE if metric < filters.th_silence else OPEN
        rebuilt.append(issue)

    project.issues = rebuilt
    project.filter_config = filters


__all__ = [
    "ADDRESSED",
    "DEFAULT_TAU",
    "DEFAULT_TH_PRESENTER",
    "DEFAULT_TH_SILENCE",
    "DISMISSED",
    "FilterConfig",
    "FilterOutcome",
    "ISSUE_STATUSES",
    "Issue",
    "OPEN",
    "REFERENCE_FRAME_AREA",
    "SUPPRESSED_PRESENTER",
    "SUPPRESSED_SILENCE",
    "effective_presenter_threshold",
    "presenter_metric",
    "refilter",
    "silence_metric",
    "surface_issues",
]
