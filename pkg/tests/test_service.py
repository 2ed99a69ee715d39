import json
import os

import pytest
from fastapi.testclient import TestClient

from avasym.service import create_app
from avasym.service import schemas

FIXTURES_DIR = os.path.join(os.path.dirname(__file__), "fixtures", "api")
RECORD = os.environ.get("AVASYM_RECORD_API_FIXTURES") == "1"

# response schema per recorded interaction
SCHEMA_BY_NAME = {
    "create_project": schemas.ProjectResponse,
    "list_projects": schemas.ProjectListResponse,
    "get_project": schemas.ProjectResponse,
    "get_status": schemas.StatusResponse,
    "get_timeline": schemas.TimelineResponse,
    "get_matches": schemas.MatchesResponse,
    "add_description": schemas.ProjectResponse,
    "add_caption": schemas.ProjectResponse,
    "dismiss_presenter_issue": schemas.ProjectResponse,
    "add_manual_issue": schemas.ProjectResponse,
    "put_filter": schemas.ProjectResponse,
    "get_timeline_after_mutations": schemas.TimelineResponse,
    "export_schedule": None,  # ad-hoc json payload
    "get_preview": schemas.PreviewResponse,
    "stale_revision_dismiss": schemas.ApiError,
    "missing_if_match": schemas.ApiError,
    "unknown_project": schemas.ApiError,
    "duplicate_manual_issue": schemas.ApiError,
    "annotation_on_dismissed": schemas.ApiError,
}
TEXT_INTERACTIONS = {"export_captions", "export_descriptions", "bundle_manifest"}


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    projects = tmp_path_factory.mktemp("projects")
    app = create_app(str(projects))
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


@pytest.fixture(scope="module")
def session(client, fixture_bundle):
    """Drive every endpoint once, in a deterministic order; collect the log."""
    bundle_path = fixture_bundle["bundle"]
    log = []

    def call(name, method, path, json_body=None, headers=None, params=None):
        resp = client.request(method, path, json=json_body, headers=headers, params=params)
        body = resp.text if name in TEXT_INTERACTIONS else resp.json()
        log.append({
            "name": name,
            "request": {"method": method, "path": path, "json": json_body,
                        "headers": headers or {}, "params": params or {}},
            "response": {"status": resp.status_code, "body": body},
        })
        return resp

    r = call("create_project", "POST", "/projects",
             json_body={"bundle_path": bundle_path})
    project_id = r.json()["project_id"]

    call("list_projects", "GET", "/projects")
    call("get_project", "GET", f"/projects/{project_id}")
    call("get_status", "GET", f"/projects/{project_id}/status")
    call("get_timeline", "GET", f"/projects/{project_id}/timeline")
    call("get_matches", "GET", f"/projects/{project_id}/segments/vis-0001/matches",
         params={"k": 3})

    call("add_description", "POST", f"/projects/{project_id}/annotations",
         json_body={"kind": "audio_description", "segment_id": "vis-0001",
                    "text": "The scene changes to a teal wall", "anchor_time": 10.0},
         headers={"If-Match": "0"})
    call("add_caption", "POST", f"/projects/{project_id}/annotations",
         json_body={"kind": "caption", "segment_id": "aud-0003",
                    "text": "(a steady tone rings)"},
         headers={"If-Match": "1"})
    call("dismiss_presenter_issue", "POST",
         f"/projects/{project_id}/issues/iss-vis-0002/dismiss",
         headers={"If-Match": "2"})
    call("add_manual_issue", "POST", f"/projects/{project_id}/issues",
         json_body={"segment_id": "vis-0000"}, headers={"If-Match": "3"})
    call("put_filter", "PUT", f"/projects/{project_id}/filter",
         json_body={"tau": 0.5}, headers={"If-Match": "4"})
    call("get_timeline_after_mutations", "GET", f"/projects/{project_id}/timeline")

    call("export_captions", "GET", f"/projects/{project_id}/export",
         params={"kind": "captions"})
    call("export_descriptions", "GET", f"/projects/{project_id}/export",
         params={"kind": "descriptions"})
    call("export_schedule", "GET", f"/projects/{project_id}/export",
         params={"kind": "schedule"})
    call("get_preview", "GET", f"/projects/{project_id}/preview")
    call("bundle_manifest", "GET", f"/projects/{project_id}/bundle/bundle.toml")

    call("stale_revision_dismiss", "POST",
         f"/projects/{project_id}/issues/iss-aud-0003/dismiss",
         headers={"If-Match": "0"})
    call("missing_if_match", "POST", f"/projects/{project_id}/issues",
         json_body={"segment_id": "vis-0004"})
    call("unknown_project", "GET", "/projects/prj-doesnotexist")
    call("duplicate_manual_issue", "POST", f"/projects/{project_id}/issues",
         json_body={"segment_id": "vis-0000"}, headers={"If-Match": "5"})
    call("annotation_on_dismissed", "POST", f"/projects/{project_id}/annotations",
         json_body={"kind": "audio_description", "segment_id": "vis-0002",
                    "text": "should fail"}, headers={"If-Match": "5"})

    return {"project_id": project_id, "bundle_path": bundle_path, "log": log}


def normalize(value, bundle_path):
    """Make recorded payloads machine-independent."""
    if isinstance(value, str):
        return value.replace(bundle_path, "<BUNDLE_PATH>")
    if isinstance(value, list):
        return [normalize(v, bundle_path) for v in value]
    if isinstance(value, dict):
        return {k: normalize(v, bundle_path) for k, v in value.items()}
    return value


def deep_equal(a, b, path=""):
    if isinstance(a, float) and isinstance(b, (int, float)):
        assert a == pytest.approx(b, rel=1e-9, abs=1e-12), f"float mismatch at {path}"
    elif isinstance(a, dict):
        assert isinstance(b, dict) and set(a) == set(b), f"keys differ at {path}"
        for k in a:
            deep_equal(a[k], b[k], f"{path}.{k}")
    elif isinstance(a, list):
        assert isinstance(b, list) and len(a) == len(b), f"length differs at {path}"
        for i, (x, y) in enumerate(zip(a, b)):
            deep_equal(x, y, f"{path}[{i}]")
    else:
        assert a == b, f"{path}: {a!r} != {b!r}"


class TestApiContract:
    def test_record_or_verify_fixtures(self, session):
        os.makedirs(FIXTURES_DIR, exist_ok=True)
        for entry in session["log"]:
            recorded = normalize(entry, session["bundle_path"])
            path = os.path.join(FIXTURES_DIR, f"{entry['name']}.json")
            if RECORD:
                with open(path, "w", encoding="utf-8") as fh:
                    json.dump(recorded, fh, indent=2, sort_keys=True)
                    fh.write("\n")
            else:
                assert os.path.exists(path), f"missing recorded fixture {entry['name']}"
                with open(path, encoding="utf-8") as fh:
                    expected = json.load(fh)
                assert recorded["response"]["status"] == expected["response"]["status"], \
                    entry["name"]
                deep_equal(recorded["response"]["body"], expected["response"]["body"],
                           entry["name"])

    def test_recorded_fixtures_pass_schema_validation(self, session):
        for entry in session["log"]:
            name = entry["name"]
            if name in TEXT_INTERACTIONS or SCHEMA_BY_NAME.get(name) is None:
                continue
            model = SCHEMA_BY_NAME[name]
            model.model_validate(entry["response"]["body"])

    def test_every_endpoint_has_a_fixture(self, session):
        names = {e["name"] for e in session["log"]}
        assert set(SCHEMA_BY_NAME) | TEXT_INTERACTIONS <= names


class TestApiSemantics:
    def test_mutation_statuses(self, session, client):
        pid = session["project_id"]
        doc = client.get(f"/projects/{pid}").json()
        statuses = {i["issue_id"]: i["status"] for i in doc["issues"]}
        assert statuses["iss-vis-0001"] == "addressed"
        assert statuses["iss-aud-0003"] == "addressed"
        assert statuses["iss-vis-0002"] == "dismissed"
        assert statuses["iss-vis-0000"] == "open"  # the manual issue
        assert doc["revision"] == 5

    def test_stale_revision_409(self, session):
        entry = next(e for e in session["log"] if e["name"] == "stale_revision_dismiss")
        assert entry["response"]["status"] == 409
        assert entry["response"]["body"]["code"] == "stale_revision"

    def test_missing_if_match_400(self, session):
        entry = next(e for e in session["log"] if e["name"] == "missing_if_match")
        assert entry["response"]["status"] == 400

    def test_unknown_project_404(self, session):
        entry = next(e for e in session["log"] if e["name"] == "unknown_project")
        assert entry["response"]["status"] == 404

    def test_lifecycle_violations_422(self, session):
        for name in ("duplicate_manual_issue", "annotation_on_dismissed"):
            entry = next(e for e in session["log"] if e["name"] == name)
            assert entry["response"]["status"] == 422, name

    def test_timeline_matches_refilter_semantics(self, session, client):
        pid = session["project_id"]
        timeline = client.get(f"/projects/{pid}/timeline").json()
        assert timeline["tau"] == 0.5
        by_id = {bar["segment_id"]: bar for bar in timeline["visual"]}
        # scores 0.0 and 0.004 stay below 0.5; statuses survived the slider move
        assert by_id["vis-0001"]["status"] == "addressed"
        assert by_id["vis-0002"]["status"] == "dismissed"
        assert by_id["vis-0003"]["status"] is None

    def test_timeline_colors_equal_score_to_color(self, session, client):
        from avasym.project import score_to_color

        pid = session["project_id"]
        timeline = client.get(f"/projects/{pid}/timeline").json()
        for bar in timeline["visual"] + timeline["audio"]:
            expected = score_to_color(bar["score"], bar["status"])
            assert tuple(bar["color"]) == expected

    def test_matches_are_descending(self, session, client):
        pid = session["project_id"]
        body = client.get(f"/projects/{pid}/segments/vis-0001/matches",
                          params={"k": 3}).json()
        values = [v for _, v in body["matches"]]
        assert len(values) <= 3
        assert values == sorted(values, reverse=True)

    def test_export_captions_reparse(self, session):
        from oracles import parse_webvtt_strict

        entry = next(e for e in session["log"] if e["name"] == "export_captions")
        cues = parse_webvtt_strict(entry["response"]["body"])
        assert cues == [(34.6, 50.4, "(a steady tone rings)")]

    def test_preview_events_ordered(self, session):
        entry = next(e for e in session["log"] if e["name"] == "get_preview")
        events = entry["response"]["body"]["events"]
        assert [e["action"] for e in events[:3]] == ["pause_video", "speak", "resume_video"]
        ats = [e["at"] for e in events]
        assert ats == sorted(ats)

    def test_persistence_across_app_restart(self, session, client, tmp_path_factory):
        # a fresh app over the same projects dir sees the same state
        store_root = client.app.state.store.root
        fresh = create_app(store_root)
        with TestClient(fresh) as c2:
            doc = c2.get(f"/projects/{session['project_id']}").json()
            assert doc["revision"] == 5

    def test_validation_error_is_400_with_api_error_shape(self, client):
        resp = client.post("/projects", json={"not_bundle_path": 1})
        assert resp.status_code == 400
        body = resp.json()
        assert body["code"] == "invalid_request"
