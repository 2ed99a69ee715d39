"""Authoring state: issues, descriptions, captions, threshold, exports.

A Project is the single mutable artifact of the system.  Every mutation bumps
``revision`` by exactly one and appends to ``mutation_log``, so replaying the
log against a freshly analyzed project reproduces the file byte for byte.
Timestamps in author action logs are logical (the revision at action time),
never wall clock, for the same reason.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field

from .errors import (
    AlreadyAddressed,
    DuplicateIssue,
    EmptyText,
    FormatError,
    InvalidRequest,
    LifecycleViolation,
    ScoreOutOfRange,
    UnknownIssue,
    UnknownSegment,
    VersionUnsupported,
)
from .grounding import ScoredSegment, TemporalWeightConfig
from .postprocess import (
    ADDRESSED,
    DISMISSED,
    FilterConfig,
    Issue,
    OPEN,
    SUPPRESSED_PRESENTER,
    SUPPRESSED_SILENCE,
    refilter,
)
from .segmentation import AudioSegment, VisualSegment

PROJECT_FORMAT_VERSION = 1
PROJECT_FILE_SUFFIX = ".xa11y.json"

AUDIO_DESCRIPTION = "audio_description"
CAPTION = "caption"
ANNOTATION_KINDS = (AUDIO_DESCRIPTION, CAPTION)

# timeline endpoint colors (golden constants shared with the UI)
COLOR_ACCESSIBLE = (128, 128, 128)
COLOR_INACCESSIBLE = (220, 38, 38)
COLOR_ADDRESSED = (59, 130, 246)
COLOR_DISMISSED = (75, 85, 99)

# allowed issue status transitions (edit/un-save reopens, re-open undismisses)
_TRANSITIONS = {
    (OPEN, ADDRESSED), (OPEN, DISMISSED),
    (SUPPRESSED_PRESENTER, ADDRESSED), (SUPPRESSED_PRESENTER, DISMISSED),
    (SUPPRESSED_SILENCE, ADDRESSED), (SUPPRESSED_SILENCE, DISMISSED),
    (ADDRESSED, OPEN), (DISMISSED, OPEN),
}


@dataclass
class AnnotationEntry:
    entry_id: str
    kind: str  # AUDIO_DESCRIPTION | CAPTION
    segment_id: str
    anchor_time: float
    text: str
    author_action_log: list[tuple[int, str]] = field(default_factory=list)  # (revision, action)


@dataclass(frozen=True)
class PreviewEvent:
    at: float
    action: str  # pause_video | speak | resume_video | show_caption
    text: str | None = None
    until: float | None = None


def _srgb_channel_to_linear(c: int) -> float:
    s = c / 255.0
    return s / 12.92 if s <= 0.04045 else ((s + 0.055) / 1.055) ** 2.4


def _linear_to_srgb_channel(lin: float) -> int:
    s = 12.92 * lin if lin <= 0.0031308 else 1.055 * lin ** (1 / 2.4) - 0.055
    return int(math.floor(s * 255.0 + 0.5))  # round half-up


def score_to_color(score: float, status: str | None = None) -> tuple[int, int, int]:
    """Timeline color for a segment: accessible gray blending to issue red in
    linear light, with fixed colors for addressed and dismissed segments."""
    if status == ADDRESSED:
        return COLOR_ADDRESSED
    if status == DISMISSED:
        return COLOR_DISMISSED
    if not 0.0 <= score <= 1.0:
        raise ScoreOutOfRange(f"score must be in [0, 1], got {score}")
    red_weight = 1.0 - score
    mixed = []
    for gray_c, red_c in zip(COLOR_ACCESSIBLE, COLOR_INACCESSIBLE):
        lin = (1.0 - red_weight) * _srgb_channel_to_linear(gray_c) \
            + red_weight * _srgb_channel_to_linear(red_c)
        mixed.append(_linear_to_srgb_channel(lin))
    return tuple(mixed)


def _vtt_timestamp(t: float) -> str:
    ms = int(round(t * 1000))
    h, rem = divmod(ms, 3_600_000)
    m, rem = divmod(rem, 60_000)
    s, ms = divmod(rem, 1000)
    return f"{h:02d}:{m:02d}:{s:02d}.{ms:03d}"


def _escape_cue_text(text: str) -> str:
    # cue payloads may be multi-line but not contain blank lines
    lines = [ln for ln in text.splitlines() if ln.strip()]
    escaped = "\n".join(lines) if lines else text.strip()
    return escaped.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


@dataclass
class Project:
    project_id: str
    video_id: str
    duration: float
    visual_segments: list[VisualSegment]
    audio_segments: list[AudioSegment]
    scored_visual: list[ScoredSegment]
    scored_audio: list[ScoredSegment]
    issues: list[Issue]
    annotations: list[AnnotationEntry]
    filter_config: FilterConfig
    presenter_metrics: dict[str, float]
    silence_metrics: dict[str, float]
    faces_frame_area: int | None
    matrices_summary: dict[str, str]  # kind -> checksum
    provenance: dict
    revision: int = 0
    mutation_log: list[dict] = field(default_factory=list)

    # --- lookups -----------------------------------------------------------

    def segment(self, segment_id: str):
        for seg in self.visual_segments:
            if seg.id == segment_id:
                return seg
        for seg in self.audio_segments:
            if seg.id == segment_id:
                return seg
        raise UnknownSegment(segment_id)

    def issue(self, issue_id: str) -> Issue:
        for issue in self.issues:
            if issue.issue_id == issue_id:
                return issue
        raise UnknownIssue(issue_id)

    def issue_for_segment(self, segment_id: str) -> Issue | None:
        for issue in self.issues:
            if issue.segment_id == segment_id:
                return issue
        return None

    def scored(self, segment_id: str) -> ScoredSegment:
        for s in self.scored_visual + self.scored_audio:
            if s.segment_id == segment_id:
                return s
        raise UnknownSegment(segment_id)

    def _bump(self, op: dict):
        self.revision += 1
        self.mutation_log.append(op)

    def _transition(self, issue: Issue, new_status: str):
        if (issue.status, new_status) not in _TRANSITIONS:
            raise LifecycleViolation(f"{issue.issue_id}: {issue.status} -> {new_status}")
        issue.status = new_status

    # --- authoring mutations -------------------------------------------------

    def add_annotation(self, kind: str, segment_id: str, text: str,
                       anchor_time: float | None = None) -> AnnotationEntry:
        """Attach a description or caption; the segment's issue becomes addressed.

        A segment with no issue yet gets a manual one, mirroring the
        double-click-to-describe flow.
        """
        if kind not in ANNOTATION_KINDS:
            raise InvalidRequest(f"unknown annotation kind {kind!r}")
        if not text.strip():
            raise EmptyText("annotation text must be non-empty")
        seg = self.segment(segment_id)
        if anchor_time is None:
            anchor_time = seg.start
        if not seg.start <= anchor_time <= seg.end:
            raise InvalidRequest(
                f"anchor_time {anchor_time} outside segment [{seg.start}, {seg.end}]"
            )

        issue = self.issue_for_segment(segment_id)
        if issue is None:
            modality = "visual" if isinstance(seg, VisualSegment) else "audio"
            issue = Issue(issue_id=f"iss-{segment_id}", segment_id=segment_id,
                          modality=modality, score=self.scored(segment_id).score,
                          status=OPEN, created_from="manual")
            self.issues.append(issue)
        if issue.status != ADDRESSED:
            self._transition(issue, ADDRESSED)

        entry = AnnotationEntry(
            entry_id=f"ann-{len(self.annotations):04d}", kind=kind,
            segment_id=segment_id, anchor_time=anchor_time, text=text,
        )
        self.annotations.append(entry)
        self._bump({"op": "add_annotation", "kind": kind, "segment_id": segment_id,
                    "text": text, "anchor_time": anchor_time})
        entry.author_action_log.append((self.revision, "save"))
        return entry

    def dismiss_issue(self, issue_id: str) -> Issue:
        """Mark an issue as not needing work; dismissing twice is a no-op."""
        issue = self.issue(issue_id)
        if issue.status == DISMISSED:
            return issue
        if issue.status == ADDRESSED:
            raise AlreadyAddressed(f"{issue_id} is addressed; un-save it first")
        self._transition(issue, DISMISSED)
        self._bump({"op": "dismiss_issue", "issue_id": issue_id})
        return issue

    def add_manual_issue(self, segment_id: str) -> Issue:
        """Surface a segment the pipeline did not flag.

        A dismissed or suppressed issue on the segment is re-opened instead
        of duplicated; an open or addressed one rejects the request.
        """
        seg = self.segment(segment_id)
        existing = self.issue_for_segment(segment_id)
        if existing is not None:
            if existing.status in (OPEN, ADDRESSED):
                raise DuplicateIssue(f"{segment_id} already has an active issue")
            self._transition(existing, OPEN)
            self._bump({"op": "add_manual_issue", "segment_id": segment_id})
            return existing
        modality = "visual" if isinstance(seg, VisualSegment) else "audio"
        issue = Issue(issue_id=f"iss-{segment_id}", segment_id=segment_id,
                      modality=modality, score=self.scored(segment_id).score,
                      status=OPEN, created_from="manual")
        self.issues.append(issue)
        self._bump({"op": "add_manual_issue", "segment_id": segment_id})
        return issue

    def reopen_issue(self, issue_id: str) -> Issue:
        """Un-save or un-dismiss an issue (addressed/dismissed -> open)."""
        issue = self.issue(issue_id)
        if issue.status == OPEN:
            return issue
        self._transition(issue, OPEN)
        self._bump({"op": "reopen_issue", "issue_id": issue_id})
        return issue

    def apply_refilter(self, tau: float, th_presenter: float | None = None,
                       th_silence: float | None = None):
        refilter(self, tau, th_presenter=th_presenter, th_silence=th_silence)
        self._bump({"op": "refilter", "tau": tau, "th_presenter": th_presenter,
                    "th_silence": th_silence})

    # --- derived views ---------------------------------------------------------

    def timeline(self) -> dict[str, list[dict]]:
        """Per-track bars: id, span, score, status, and display color."""
        tracks: dict[str, list[dict]] = {"visual": [], "audio": []}
        scored_by_id = {s.segment_id: s for s in self.scored_visual + self.scored_audio}
        for track, segments in (("visual", self.visual_segments), ("audio", self.audio_segments)):
            for seg in segments:
                issue = self.issue_for_segment(seg.id)
                status = issue.status if issue else None
                score = scored_by_id[seg.id].score
                bar = {
                    "segment_id": seg.id,
                    "start": seg.start,
                    "end": seg.end,
                    "score": score,
                    "status": status,
                    "issue_id": issue.issue_id if issue else None,
                    "color": list(score_to_color(score, status)),
                }
                if isinstance(seg, AudioSegment):
                    bar["kind"] = seg.kind
                    bar["transcript"] = seg.transcript
                tracks[track].append(bar)
        return tracks

    def top_matches(self, segment_id: str, k: int) -> list[tuple[str, float]]:
        scored = self.scored(segment_id)
        if k < 0:
            raise InvalidRequest("k must be non-negative")
        return list(scored.contributions[:k])

    def _exportable(self, kind: str) -> list[AnnotationEntry]:
        out = []
        for entry in self.annotations:
            if entry.kind != kind:
                continue
            issue = self.issue_for_segment(entry.segment_id)
            if issue is not None and issue.status == DISMISSED:
                continue  # dismissed segments stay out of exports
            out.append(entry)
        return out

    def export_webvtt(self, kind: str) -> str:
        """Render annotations of one kind as a WebVTT document.

        Captions span their segment; descriptions become 0.1 s cues at their
        anchor under a ``descriptions`` note (players treat the real pausing
        schedule as authoritative, see build_preview_schedule).
        """
        if kind not in ANNOTATION_KINDS:
            raise FormatError(f"unknown export kind {kind!r}")
        lines = ["WEBVTT", ""]
        if kind == AUDIO_DESCRIPTION:
            lines += ["NOTE descriptions", ""]
        cues = []
        for entry in self._exportable(kind):
            if kind == CAPTION:
                seg = self.segment(entry.segment_id)
                start, end = seg.start, seg.end
            else:
                start, end = entry.anchor_time, entry.anchor_time + 0.1
            cues.append((start, end, _escape_cue_text(entry.text)))
        cues.sort(key=lambda c: c[0])
        for start, end, text in cues:
            lines.append(f"{_vtt_timestamp(start)} --> {_vtt_timestamp(end)}")
            lines.append(text)
            lines.append("")
        return "\n".join(lines).rstrip("\n") + "\n"

    def build_preview_schedule(self) -> list[PreviewEvent]:
        """Pause/speak/resume events for descriptions, caption overlays for
        captions, sorted by time; same-anchor descriptions share one pause."""
        events: list[PreviewEvent] = []
        descriptions = self._exportable(AUDIO_DESCRIPTION)
        by_anchor: dict[float, list[AnnotationEntry]] = {}
        for entry in descriptions:
            by_anchor.setdefault(entry.anchor_time, []).append(entry)
        for anchor in sorted(by_anchor):
            events.append(PreviewEvent(at=anchor, action="pause_video"))
            for entry in by_anchor[anchor]:
                events.append(PreviewEvent(at=anchor, action="speak", text=entry.text))
            events.append(PreviewEvent(at=anchor, action="resume_video"))
        for entry in self._exportable(CAPTION):
            seg = self.segment(entry.segment_id)
            events.append(PreviewEvent(at=seg.start, action="show_caption",
                                       text=entry.text, until=seg.end))
        priority = {"pause_video": 0, "speak": 1, "resume_video": 2, "show_caption": 3}
        events.sort(key=lambda e: (e.at, priority[e.action]))
        return events

    # --- persistence -------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format_version": PROJECT_FORMAT_VERSION,
            "project_id": self.project_id,
            "video_id": self.video_id,
            "duration": self.duration,
            "revision": self.revision,
            "provenance": self.provenance,
            "filter_config": {
                "th_presenter": self.filter_config.th_presenter,
                "th_silence": self.filter_config.th_silence,
                "tau": self.filter_config.tau,
            },
            "segments": {
                "visual": [
                    {"id": s.id, "index": s.index, "start": s.start, "end": s.end,
                     "representative_frames": list(s.representative_frames)}
                    for s in self.visual_segments
                ],
                "audio": [
                    {"id": s.id, "index": s.index, "start": s.start, "end": s.end,
                     "kind": s.kind, "transcript": s.transcript}
                    for s in self.audio_segments
                ],
            },
            "scores": {
                "visual": [self._scored_dict(s) for s in self.scored_visual],
                "audio": [self._scored_dict(s) for s in self.scored_audio],
            },
            "issues": [
                {"issue_id": i.issue_id, "segment_id": i.segment_id, "modality": i.modality,
                 "score": i.score, "status": i.status, "created_from": i.created_from}
                for i in self.issues
            ],
            "annotations": [
                {"entry_id": a.entry_id, "kind": a.kind, "segment_id": a.segment_id,
                 "anchor_time": a.anchor_time, "text": a.text,
                 "author_action_log": [list(rec) for rec in a.author_action_log]}
                for a in self.annotations
            ],
            "metrics": {
                "presenter": self.presenter_metrics,
                "silence": self.silence_metrics,
                "faces_frame_area": self.faces_frame_area,
            },
            "matrices": self.matrices_summary,
            "mutation_log": self.mutation_log,
        }

    @staticmethod
    def _scored_dict(s: ScoredSegment) -> dict:
        return {
            "segment_id": s.segment_id, "modality": s.modality,
            "raw_score": s.raw_score, "score": s.score, "fixed": s.fixed,
            "contributions": [[sid, val] for sid, val in s.contributions],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Project":
        try:
            version = doc["format_version"]
        except (KeyError, TypeError) as exc:
            raise FormatError(f"not a project document: {exc}") from exc
        if version > PROJECT_FORMAT_VERSION:
            raise VersionUnsupported(f"project format {version} is newer than {PROJECT_FORMAT_VERSION}")
        try:
            visual_segments = [
                VisualSegment(id=s["id"], index=s["index"], start=s["start"], end=s["end"],
                              representative_frames=tuple(s["representative_frames"]))
                for s in doc["segments"]["visual"]
            ]
            audio_segments = [
                AudioSegment(id=s["id"], index=s["index"], start=s["start"], end=s["end"],
                             kind=s["kind"], transcript=s["transcript"])
                for s in doc["segments"]["audio"]
            ]
            scored_visual = [cls._scored_from(s) for s in doc["scores"]["visual"]]
            scored_audio = [cls._scored_from(s) for s in doc["scores"]["audio"]]
            issues = [
                Issue(issue_id=i["issue_id"], segment_id=i["segment_id"], modality=i["modality"],
                      score=i["score"], status=i["status"], created_from=i["created_from"])
                for i in doc["issues"]
            ]
            annotations = [
                AnnotationEntry(
                    entry_id=a["entry_id"], kind=a["kind"], segment_id=a["segment_id"],
                    anchor_time=a["anchor_time"], text=a["text"],
                    author_action_log=[tuple(rec) for rec in a["author_action_log"]],
                )
                for a in doc["annotations"]
            ]
            fc = doc["filter_config"]
            return cls(
                project_id=doc["project_id"],
                video_id=doc["video_id"],
                duration=doc["duration"],
                visual_segments=visual_segments,
                audio_segments=audio_segments,
                scored_visual=scored_visual,
                scored_audio=scored_audio,
                issues=issues,
                annotations=annotations,
                filter_config=FilterConfig(th_presenter=fc["th_presenter"],
                                           th_silence=fc["th_silence"], tau=fc["tau"]),
                presenter_metrics=doc["metrics"]["presenter"],
                silence_metrics=doc["metrics"]["silence"],
                faces_frame_area=doc["metrics"]["faces_frame_area"],
                matrices_summary=doc["matrices"],
                provenance=doc["provenance"],
                revision=doc["revision"],
                mutation_log=doc["mutation_log"],
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed project document: {exc}") from exc

    @staticmethod
    def _scored_from(s: dict) -> ScoredSegment:
        return ScoredSegment(
            segment_id=s["segment_id"], modality=s["modality"], raw_score=s["raw_score"],
            score=s["score"], fixed=s["fixed"],
            contributions=tuple((sid, val) for sid, val in s["contributions"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False,
                          separators=(",", ":")) + "\n"


def make_project_id(video_id: str, provenance: dict) -> str:
    """Stable id from the video and analysis parameters.

    The bundle's filesystem location is deliberately not part of the
    identity, so re-analyzing the same video from another path (or machine)
    yields the same project id.
    """
    params = {k: v for k, v in provenance.items() if k != "bundle_path"}
    payload = json.dumps({"video_id": video_id, "params": params}, sort_keys=True)
    return "prj-" + hashlib.sha256(payload.encode()).hexdigest()[:12]


def save_project(project: Project, path: str):
    """Atomic write (temp file + rename) of the project document."""
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(project.to_json())
    os.replace(tmp, path)


def load_project(path: str) -> Project:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return Project.from_dict(doc)


def replay_mutations(project: Project, log: list[dict]) -> Project:
    """Apply a recorded mutation log to a freshly analyzed project."""
    for op in log:
        name = op["op"]
        if name == "add_annotation":
            project.add_annotation(op["kind"], op["segment_id"], op["text"],
                                   anchor_time=op["anchor_time"])
        elif name == "dismiss_issue":
            project.dismiss_issue(op["issue_id"])
        elif name == "add_manual_issue":
            project.add_manual_issue(op["segment_id"])
        elif name == "reopen_issue":
            project.reopen_issue(op["issue_id"])
        elif name == "refilter":
            project.apply_refilter(op["tau"], th_presenter=op.get("th_presenter"),
                                   th_silence=op.get("th_silence"))
        else:
            raise FormatError(f"unknown mutation op {name!r}")
    return project


__all__ = [
    "ANNOTATION_KINDS",
    "AUDIO_DESCRIPTION",
    "AnnotationEntry",
    "CAPTION",
    "COLOR_ACCESSIBLE",
    "COLOR_ADDRESSED",
    "COLOR_DISMISSED",
    "COLOR_INACCESSIBLE",
    "PROJECT_FILE_SUFFIX",
    "PROJECT_FORMAT_VERSION",
    "PreviewEvent",
    "Project",
    "load_project",
    "make_project_id",
    "replay_mutations",
    "save_project",
    "score_to_color",
]
