"""Pydantic request/response models for the HTTP API.

These mirror the project document structure; the API never exposes state the
core modules did not compute.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class ProviderOptions(BaseModel):
    provider: Literal["builtin", "file"] = "builtin"
    dim: int = Field(default=32, ge=2)
    seed: int = 42
    file_path: Optional[str] = None


class FilterOptions(BaseModel):
    tau: float = Field(default=0.35, ge=0.0, le=1.0)
    th_presenter: float = Field(default=58000.0, ge=0.0)
    th_silence: float = Field(default=0.007, ge=0.0)


class AnalyzeRequest(BaseModel):
    bundle_path: str
    provider: ProviderOptions = Field(default_factory=ProviderOptions)
    filters: FilterOptions = Field(default_factory=FilterOptions)
    seed: Optional[int] = None
    content_threshold: float = Field(default=27.0, gt=0.0)
    weight_factor: float = Field(default=0.45, gt=0.0, le=1.0)


class ApiError(BaseModel):
    code: str
    message: str
    detail: Optional[dict | list | str] = None


class SegmentModel(BaseModel):
    id: str
    index: int
    start: float
    end: float
    kind: Optional[str] = None  # audio segments only
    transcript: Optional[str] = None
    representative_frames: Optional[list[int]] = None  # visual segments only


class ScoredSegmentModel(BaseModel):
    segment_id: str
    modality: Literal["visual", "audio"]
    raw_score: float
    score: float
    fixed: bool
    contributions: list[tuple[str, float]]


class IssueModel(BaseModel):
    issue_id: str
    segment_id: str
    modality: Literal["visual", "audio"]
    score: float
    status: Literal["open", "addressed", "dismissed",
                    "suppressed_presenter", "suppressed_silence"]
    created_from: Literal["auto", "manual"]


class AnnotationModel(BaseModel):
    entry_id: str
    kind: Literal["audio_description", "caption"]
    segment_id: str
    anchor_time: float
    text: str
    author_action_log: list[tuple[int, str]]


class ProjectResponse(BaseModel):
    format_version: int
    project_id: str
    video_id: str
    duration: float
    revision: int
    provenance: dict
    filter_config: FilterOptions
    segments: dict[str, list[SegmentModel]]
    scores: dict[str, list[ScoredSegmentModel]]
    issues: list[IssueModel]
    annotations: list[AnnotationModel]
    metrics: dict
    matrices: dict[str, str]
    mutation_log: list[dict]


class TimelineBar(BaseModel):
    segment_id: str
    start: float
    end: float
    score: float
    status: Optional[str] = None
    issue_id: Optional[str] = None
    color: tuple[int, int, int]
    kind: Optional[str] = None
    transcript: Optional[str] = None


class TimelineResponse(BaseModel):
    project_id: str
    revision: int
    duration: float
    tau: float
    visual: list[TimelineBar]
    audio: list[TimelineBar]


class MatchesResponse(BaseModel):
    segment_id: str
    matches: list[tuple[str, float]]


class AnnotationRequest(BaseModel):
    kind: Literal["audio_description", "caption"]
    segment_id: str
    text: str
    anchor_time: Optional[float] = None


class ManualIssueRequest(BaseModel):
    segment_id: str


class FilterRequest(BaseModel):
    tau: float
    th_presenter: Optional[float] = None
    th_silence: Optional[float] = None


class PreviewEventModel(BaseModel):
    at: float
    action: Literal["pause_video", "speak", "resume_video", "show_caption"]
    text: Optional[str] = None
    until: Optional[float] = None


class PreviewResponse(BaseModel):
    project_id: str
    revision: int
    events: list[PreviewEventModel]


class StatusResponse(BaseModel):
    project_id: str
    state: Literal["ready"]
    revision: int


class ProjectListResponse(BaseModel):
    projects: list[dict]
