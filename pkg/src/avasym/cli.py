"""Command-line entry points.

``analyze`` and ``export`` are thin HTTP clients: they speak to a running
server when ``--server`` is given, and otherwise drive the same ASGI app
in-process, so both paths exercise identical API code.  ``eval`` is a local
batch utility, and ``serve`` hosts the API plus the optional web UI.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys

import httpx

from .errors import AvasymError
from .evaluation import baseline_gaps, baseline_random, evaluate, load_labels
from .pipeline import AnalysisRequest, analyze, predictions_from_project
from .embedding import EmbeddingProviderConfig
from .grounding import TemporalWeightConfig
from .ingest import load_bundle
from .postprocess import FilterConfig
from .segmentation import assign_transcripts, detect_shots, segment_audio

DEFAULT_PROJECTS_DIR = os.path.expanduser("~/.avasym/projects")


def _request(args, method: str, path: str, **kwargs) -> httpx.Response:
    if getattr(args, "server", None):
        return httpx.request(method, args.server.rstrip("/") + path, **kwargs)

    from .service import create_app

    app = create_app(args.projects_dir)

    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport, base_url="http://avasym") as client:
            return await client.request(method, path, **kwargs)

    return asyncio.run(go())


def _fail_on_error(resp: httpx.Response):
    if resp.status_code >= 400:
        try:
            err = resp.json()
            sys.exit(f"error [{err.get('code')}]: {err.get('message')}")
        except (ValueError, KeyError):
            sys.exit(f"error: HTTP {resp.status_code}: {resp.text[:500]}")


def cmd_analyze(args) -> int:
    body = {
        "bundle_path": os.path.abspath(args.bundle),
        "provider": {"provider": args.provider, "dim": args.dim, "seed": args.seed,
                     "file_path": args.embeddings},
        "filters": {"tau": args.tau, "th_presenter": args.th_presenter,
                    "th_silence": args.th_silence},
        "content_threshold": args.content_threshold,
        "weight_factor": args.weight_factor,
    }
    resp = _request(args, "POST", "/projects", json=body)
    _fail_on_error(resp)
    doc = resp.json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
            fh.write("\n")
    open_issues = sum(1 for i in doc["issues"] if i["status"] == "open")
    print(f"project {doc['project_id']}: {len(doc['segments']['visual'])} shots, "
          f"{len(doc['segments']['audio'])} audio segments, "
          f"{len(doc['issues'])} issues ({open_issues} open)")
    print(f"saved under {args.projects_dir}" if not args.server else f"stored on {args.server}")
    return 0


def cmd_export(args) -> int:
    resp = _request(args, "GET", f"/projects/{args.project}/export",
                    params={"kind": args.kind})
    _fail_on_error(resp)
    text = resp.text
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_eval(args) -> int:
    labels = load_labels(args.labels)
    if args.method == "crossmodal":
        project = analyze(AnalysisRequest(
            bundle_path=args.bundle,
            provider=EmbeddingProviderConfig(provider=args.provider, dim=args.dim,
                                             seed=args.seed, file_path=args.embeddings),
            filters=FilterConfig(tau=args.tau, th_presenter=args.th_presenter,
                                 th_silence=args.th_silence),
            weights=TemporalWeightConfig(w=args.weight_factor),
            content_threshold=args.content_threshold,
        ))
        predictions = predictions_from_project(project)
    else:
        bundle = load_bundle(args.bundle)
        visual = detect_shots(bundle.frames, args.content_threshold, duration=bundle.duration)
        audio = assign_transcripts(segment_audio(bundle.words, bundle.duration), bundle.words)
        if args.method == "gaps":
            predictions = baseline_gaps(visual, audio)
        else:
            predictions = baseline_random(visual, audio, seed=args.seed)

    report = evaluate(predictions, labels, method=args.method, mode=args.overlap_mode,
                      seed=args.seed if args.method == "random" else None)
    doc = report.to_dict()
    with open(args.report, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for modality in ("visual", "audio"):
        m = doc[modality]
        print(f"{modality}: P={m['precision']:.3f} R={m['recall']:.3f} F1={m['f1']:.3f} "
              f"(tp={m['tp']} fp={m['fp']} fn={m['fn']})")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.projects_dir, static_dir=args.static_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_fixture(args) -> int:
    from .synthetic import write_synthetic_bundle

    paths = write_synthetic_bundle(args.out)
    print(f"bundle: {paths['bundle']}")
    print(f"labels: {paths['labels']}")
    return 0


def _add_analysis_flags(p: argparse.ArgumentParser):
    p.add_argument("--provider", choices=["builtin", "file"], default="builtin")
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--embeddings", help="embedding file for the file provider")
    p.add_argument("--tau", type=float, default=0.35)
    p.add_argument("--th-presenter", type=float, default=58000.0, dest="th_presenter")
    p.add_argument("--th-silence", type=float, default=0.007, dest="th_silence")
    p.add_argument("--content-threshold", type=float, default=27.0, dest="content_threshold")
    p.add_argument("--weight-factor", type=float, default=0.45, dest="weight_factor")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avasym",
                                     description="audio/visual accessibility analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="analyze a bundle into a project")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out", help="also write the project document here")
    p.add_argument("--projects-dir", default=DEFAULT_PROJECTS_DIR, dest="projects_dir")
    p.add_argument("--server", help="use a running server instead of in-process")
    _add_analysis_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("export", help="export captions, descriptions, or the preview schedule")
    p.add_argument("--project", required=True, help="project id")
    p.add_argument("--kind", required=True, choices=["captions", "descriptions", "schedule"])
    p.add_argument("--out")
    p.add_argument("--projects-dir", default=DEFAULT_PROJECTS_DIR, dest="projects_dir")
    p.add_argument("--server")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("eval", help="score predictions against labels")
    p.add_argument("--bundle", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--method", required=True, choices=["crossmodal", "gaps", "random"])
    p.add_argument("--overlap-mode", choices=["pred", "label", "min"], default="pred",
                   dest="overlap_mode")
    p.add_argument("--report", required=True)
    _add_analysis_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8571)
    p.add_argument("--projects-dir", default=DEFAULT_PROJECTS_DIR, dest="projects_dir")
    p.add_argument("--static-dir", dest="static_dir",
                   help="directory with the built web UI")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("fixture", help="write the synthetic demo bundle")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fixture)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AvasymError as exc:
        stage = f" (stage: {exc.stage})" if exc.stage else ""
        sys.exit(f"error [{exc.code}]{stage}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
