"""End-to-end analysis: bundle -> segments -> matrices -> scores -> project.

Deterministic for a fixed provider configuration; the provenance block in the
resulting project records everything needed to recompute it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .embedding import (
    BuiltinEmbedder,
    Embedding,
    EmbeddingProviderConfig,
    AUDIO,
    TEXT,
    VISUAL,
    load_embedding_file,
    remove_stop_words,
)
from .errors import AvasymError, MissingPart
from .grounding import (
    MatchingMatrix,
    TemporalWeightConfig,
    VISUAL_AUDIO,
    VISUAL_TEXT,
    compute_matrix,
    load_matrix_file,
    normalize_scores,
    score_audio,
    score_visual,
)
from .ingest import MediaBundle, load_bundle
from .postprocess import FilterConfig, surface_issues
from .project import Project, make_project_id
from .segmentation import (
    DEFAULT_CONTENT_THRESHOLD,
    NON_SPEECH,
    SPEECH,
    assign_transcripts,
    detect_shots,
    segment_audio,
)
from .stopwords import STOP_WORDS_VERSION

STAGES = ("ingest", "segmentation", "embedding", "grounding", "postprocess", "project")


@dataclass(frozen=True)
class AnalysisRequest:
    bundle_path: str
    provider: EmbeddingProviderConfig = field(default_factory=EmbeddingProviderConfig)
    filters: FilterConfig = field(default_factory=FilterConfig)
    weights: TemporalWeightConfig = field(default_factory=TemporalWeightConfig)
    content_threshold: float = DEFAULT_CONTENT_THRESHOLD
    seed: int | None = None  # overrides provider.seed when given

    def effective_provider(self) -> EmbeddingProviderConfig:
        if self.seed is None or self.seed == self.provider.seed:
            return self.provider
        return EmbeddingProviderConfig(
            provider=self.provider.provider, dim=self.provider.dim,
            seed=self.seed, file_path=self.provider.file_path,
        )


def _stage(name: str):
    class _StageContext:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if isinstance(exc, AvasymError) and exc.stage is None:
                exc.stage = name
            return False

    return _StageContext()


def build_embeddings(bundle: MediaBundle, provider: EmbeddingProviderConfig,
                     visual_segments, audio_segments) -> tuple[list[Embedding], list[Embedding], list[Embedding]]:
    """Visual, text, and audio embeddings aligned with the segment lists."""
    if provider.provider == "file":
        path = provider.file_path or bundle.embedding_sidecar
        if not path:
            raise MissingPart("embeddings")
        expected = {
            VISUAL: [s.id for s in visual_segments],
            TEXT: [s.id for s in audio_segments if s.kind == SPEECH],
            AUDIO: [s.id for s in audio_segments if s.kind == NON_SPEECH],
        }
        loaded = load_embedding_file(path, expected=expected)
        by_key = {(e.modality, e.segment_id): e for e in loaded}
        dim = loaded[0].dim if loaded else provider.dim

        def lookup(modality, seg_id):
            e = by_key.get((modality, seg_id))
            return e if e is not None else Embedding(seg_id, modality, np.zeros(dim))

        visual = [lookup(VISUAL, s.id) for s in visual_segments]
        text = [lookup(TEXT, s.id) for s in audio_segments]
        audio = [lookup(AUDIO, s.id) for s in audio_segments]
        return visual, text, audio

    embedder = BuiltinEmbedder(dim=provider.dim, seed=provider.seed)
    visual = [embedder.embed_visual(seg, bundle.frames) for seg in visual_segments]
    text = []
    audio = []
    zero = np.zeros(provider.dim)
    for seg in audio_segments:
        if seg.kind == SPEECH:
            text.append(embedder.embed_text(seg.id, remove_stop_words(seg.transcript)))
        else:
            text.append(Embedding(seg.id, TEXT, zero))
        if seg.kind == NON_SPEECH:
            audio.append(embedder.embed_audio(seg, bundle.audio))
        else:
            audio.append(Embedding(seg.id, AUDIO, zero))
    return visual, text, audio


def analyze(request: AnalysisRequest) -> Project:
    """Run every stage and assemble a Project; errors carry their stage name."""
    with _stage("ingest"):
        bundle = load_bundle(request.bundle_path)
    return analyze_bundle(bundle, request)


def analyze_bundle(bundle: MediaBundle, request: AnalysisRequest) -> Project:
    """The post-ingest stages, for callers that already hold a bundle."""
    with _stage("segmentation"):
        visual_segments = detect_shots(bundle.frames, request.content_threshold,
                                       duration=bundle.duration)
        audio_segments = assign_transcripts(
            segment_audio(bundle.words, bundle.duration), bundle.words)

    provider = request.effective_provider()
    with _stage("embedding"):
        if bundle.matrix_sidecar:
            vt, va = load_matrix_file(bundle.matrix_sidecar,
                                      n_v=len(visual_segments), n_a=len(audio_segments))
            matrices_source = "sidecar"
        else:
            vis_emb, text_emb, audio_emb = build_embeddings(
                bundle, provider, visual_segments, audio_segments)
            vt = compute_matrix(vis_emb, text_emb, VISUAL_TEXT)
            va = compute_matrix(vis_emb, audio_emb, VISUAL_AUDIO)
            matrices_source = provider.provider

    with _stage("grounding"):
        scored_visual = [
            score_visual(i, vt, va, visual_segments, audio_segments, request.weights)
            for i in range(len(visual_segments))
        ]
        scored_audio = [
            score_audio(j, va, visual_segments, audio_segments, request.weights)
            for j in range(len(audio_segments))
        ]
        scored_visual = normalize_scores(scored_visual, "visual")
        scored_audio = normalize_scores(scored_audio, "audio")

    with _stage("postprocess"):
        outcome = surface_issues(scored_visual, scored_audio, visual_segments,
                                 audio_segments, request.filters,
                                 bundle.face_sidecar, bundle.audio)

    with _stage("project"):
        provenance = {
            "tool_version": __version__,
            "bundle_path": bundle.source_dir,
            "video_id": bundle.video_id,
            "provider": provider.provider,
            "dim": provider.dim,
            "seed": provider.seed,
            "matrices_source": matrices_source,
            "content_threshold": request.content_threshold,
            "weight_factor": request.weights.w,
            "weight_period": request.weights.period,
            "timestamp_mode": request.weights.timestamp_mode,
            "filters": {
                "tau": request.filters.tau,
                "th_presenter": request.filters.th_presenter,
                "th_silence": request.filters.th_silence,
            },
            "stop_words_version": STOP_WORDS_VERSION,
        }
        faces = bundle.face_sidecar
        return Project(
            project_id=make_project_id(bundle.video_id, provenance),
            video_id=bundle.video_id,
            duration=bundle.duration,
            visual_segments=visual_segments,
            audio_segments=audio_segments,
            scored_visual=scored_visual,
            scored_audio=scored_audio,
            issues=outcome.issues,
            annotations=[],
            filter_config=request.filters,
            presenter_metrics=outcome.presenter_metrics,
            silence_metrics=outcome.silence_metrics,
            faces_frame_area=faces.frame_width * faces.frame_height if faces else None,
            matrices_summary={VISUAL_TEXT: vt.checksum(), VISUAL_AUDIO: va.checksum()},
            provenance=provenance,
        )


def predictions_from_project(project: Project) -> list[tuple[str, float, float]]:
    """Open issues as (modality, start, end) spans for evaluation."""
    segs = {s.id: s for s in project.visual_segments + project.audio_segments}
    preds = []
    for issue in project.issues:
        if issue.status != "open":
            continue
        seg = segs[issue.segment_id]
        preds.append((issue.modality, seg.start, seg.end))
    return preds


__all__ = [
    "AnalysisRequest",
    "STAGES",
    "analyze",
    "analyze_bundle",
    "build_embeddings",
    "predictions_from_project",
]
