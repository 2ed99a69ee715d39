"""HTTP API over the pipeline and project lifecycle.

Thin wrappers only: every endpoint projects core module state, and mutating
endpoints require an ``If-Match: <revision>`` header for optimistic
concurrency (409 on mismatch).  Error payloads are ApiError documents with
codes from the closed set in docs/api.md.
"""

from __future__ import annotations

import os

from fastapi import FastAPI, Header, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse, FileResponse
from fastapi.staticfiles import StaticFiles

from ..errors import (
    AlreadyAddressed,
    AvasymError,
    DuplicateIssue,
    InvalidRequest,
    LifecycleViolation,
    StaleRevision,
    UnknownIssue,
    UnknownProject,
    UnknownSegment,
)
from ..pipeline import AnalysisRequest, analyze
from ..embedding import EmbeddingProviderConfig
from ..grounding import TemporalWeightConfig
from ..postprocess import FilterConfig
from ..project import AUDIO_DESCRIPTION, CAPTION, Project
from . import schemas
from .store import ProjectStore

_STATUS_BY_CODE = {
    "unknown_project": 404,
    "unknown_segment": 404,
    "unknown_issue": 404,
    "missing_part": 400,
    "stale_revision": 409,
    "already_addressed": 422,
    "duplicate_issue": 422,
    "lifecycle_violation": 422,
}


def _http_status(err: AvasymError) -> int:
    return _STATUS_BY_CODE.get(err.code, 400)


def create_app(projects_dir: str, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="avasym", version="0.1.0")
    store = ProjectStore(projects_dir)
    app.state.store = store

    @app.exception_handler(AvasymError)
    async def _avasym_error(request: Request, exc: AvasymError):
        detail = exc.detail
        if exc.stage is not None:
            detail = {"stage": exc.stage, "info": detail}
        payload = schemas.ApiError(code=exc.code, message=str(exc), detail=detail)
        return JSONResponse(status_code=_http_status(exc), content=payload.model_dump())

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        payload = schemas.ApiError(code="invalid_request", message="request validation failed",
                                   detail=[str(e.get("loc")) + ": " + e.get("msg", "") for e in exc.errors()])
        return JSONResponse(status_code=400, content=payload.model_dump())

    def _require_revision(project: Project, if_match: str | None):
        if if_match is None:
            raise InvalidRequest("mutating calls require an If-Match: <revision> header")
        try:
            revision = int(if_match.strip().strip('"'))
        except ValueError:
            raise InvalidRequest(f"If-Match must be an integer revision, got {if_match!r}")
        if revision != project.revision:
            raise StaleRevision(f"expected revision {project.revision}, got {revision}")

    # --- analysis ---------------------------------------------------------

    @app.post("/projects", response_model=schemas.ProjectResponse, status_code=201)
    def create_project(body: schemas.AnalyzeRequest):
        request = AnalysisRequest(
            bundle_path=body.bundle_path,
            provider=EmbeddingProviderConfig(
                provider=body.provider.provider, dim=body.provider.dim,
                seed=body.provider.seed, file_path=body.provider.file_path),
            filters=FilterConfig(tau=body.filters.tau,
                                 th_presenter=body.filters.th_presenter,
                                 th_silence=body.filters.th_silence),
            weights=TemporalWeightConfig(w=body.weight_factor),
            content_threshold=body.content_threshold,
            seed=body.seed,
        )
        project = analyze(request)
        store.put(project)
        return project.to_dict()

    @app.get("/projects", response_model=schemas.ProjectListResponse)
    def list_projects():
        out = []
        for pid in store.list_ids():
            project = store.get(pid)
            out.append({"project_id": pid, "video_id": project.video_id,
                        "revision": project.revision, "duration": project.duration})
        return {"projects": out}

    @app.get("/projects/{project_id}", response_model=schemas.ProjectResponse)
    def get_project(project_id: str):
        return store.get(project_id).to_dict()

    @app.get("/projects/{project_id}/status", response_model=schemas.StatusResponse)
    def get_status(project_id: str):
        project = store.get(project_id)
        return {"project_id": project_id, "state": "ready", "revision": project.revision}

    @app.get("/projects/{project_id}/timeline", response_model=schemas.TimelineResponse)
    def get_timeline(project_id: str):
        project = store.get(project_id)
        tracks = project.timeline()
        return {
            "project_id": project_id, "revision": project.revision,
            "duration": project.duration, "tau": project.filter_config.tau,
            "visual": tracks["visual"], "audio": tracks["audio"],
        }

    @app.get("/projects/{project_id}/segments/{segment_id}/matches",
             response_model=schemas.MatchesResponse)
    def get_matches(project_id: str, segment_id: str, k: int = Query(default=5, ge=0)):
        project = store.get(project_id)
        return {"segment_id": segment_id, "matches": project.top_matches(segment_id, k)}

    # --- mutations -----------------------------------------------------------

    @app.post("/projects/{project_id}/annotations",
              response_model=schemas.ProjectResponse)
    def post_annotation(project_id: str, body: schemas.AnnotationRequest,
                        if_match: str | None = Header(default=None, alias="If-Match")):
        with store.mutate(project_id) as project:
            _require_revision(project, if_match)
            project.add_annotation(body.kind, body.segment_id, body.text,
                                   anchor_time=body.anchor_time)
            return project.to_dict()

    @app.post("/projects/{project_id}/issues/{issue_id}/dismiss",
              response_model=schemas.ProjectResponse)
    def post_dismiss(project_id: str, issue_id: str,
                     if_match: str | None = Header(default=None, alias="If-Match")):
        with store.mutate(project_id) as project:
            _require_revision(project, if_match)
            project.dismiss_issue(issue_id)
            return project.to_dict()

    @app.post("/projects/{project_id}/issues",
              response_model=schemas.ProjectResponse)
    def post_manual_issue(project_id: str, body: schemas.ManualIssueRequest,
                          if_match: str | None = Header(default=None, alias="If-Match")):
        with store.mutate(project_id) as project:
            _require_revision(project, if_match)
            project.add_manual_issue(body.segment_id)
            return project.to_dict()

    @app.put("/projects/{project_id}/filter",
             response_model=schemas.ProjectResponse)
    def put_filter(project_id: str, body: schemas.FilterRequest,
                   if_match: str | None = Header(default=None, alias="If-Match")):
        with store.mutate(project_id) as project:
            _require_revision(project, if_match)
            project.apply_refilter(body.tau, th_presenter=body.th_presenter,
                                   th_silence=body.th_silence)
            return project.to_dict()

    # --- exports and preview -----------------------------------------------------

    @app.get("/projects/{project_id}/export")
    def get_export(project_id: str, kind: str = Query(...)):
        project = store.get(project_id)
        if kind == "captions":
            return PlainTextResponse(project.export_webvtt(CAPTION), media_type="text/vtt")
        if kind == "descriptions":
            return PlainTextResponse(project.export_webvtt(AUDIO_DESCRIPTION), media_type="text/vtt")
        if kind == "schedule":
            events = [vars(e) for e in project.build_preview_schedule()]
            return JSONResponse({"project_id": project_id, "events": events})
        raise InvalidRequest(f"unknown export kind {kind!r}")

    @app.get("/projects/{project_id}/preview", response_model=schemas.PreviewResponse)
    def get_preview(project_id: str):
        project = store.get(project_id)
        events = [vars(e) for e in project.build_preview_schedule()]
        return {"project_id": project_id, "revision": project.revision, "events": events}

    # --- media passthrough for the UI ---------------------------------------------

    @app.get("/projects/{project_id}/bundle/{rel_path:path}")
    def get_bundle_file(project_id: str, rel_path: str):
        project = store.get(project_id)
        root = project.provenance.get("bundle_path")
        if not root:
            raise UnknownProject(f"{project_id} has no bundle path recorded")
        full = os.path.realpath(os.path.join(root, rel_path))
        if not full.startswith(os.path.realpath(root) + os.sep):
            raise InvalidRequest("path escapes the bundle directory")
        if not os.path.isfile(full):
            raise UnknownSegment(f"no such bundle file: {rel_path}")
        return FileResponse(full)

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
