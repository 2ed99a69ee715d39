"""Score predicted issues against human labels, plus the two baselines.

A prediction counts as correct when a same-modality label overlaps more than
half of it (the denominator is selectable).  Labels hit by any prediction
count once toward recall, so several predictions may share one label.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .errors import FormatError
from .segmentation import NON_SPEECH, PAUSE, SPEECH, AudioSegment, VisualSegment

OVERLAP_MODES = ("pred", "label", "min")

# reference results reported for the original 20-video corpus; kept for
# context only, not reproducible without the original models and labels
REFERENCE_RESULTS = {
    "crossmodal": {"visual": {"precision": 0.694, "recall": 0.984, "f1": 0.814},
                   "audio": {"precision": 0.983, "recall": 0.843, "f1": 0.908}},
    "gaps": {"visual": {"precision": 0.833, "recall": 0.385, "f1": 0.526},
             "audio": {"precision": 0.909, "recall": 0.843, "f1": 0.874}},
    "random": {"visual": {"precision": 0.275, "recall": 0.390, "f1": 0.323},
               "audio": {"precision": 0.125, "recall": 0.381, "f1": 0.188}},
}

Prediction = tuple[str, float, float]  # (modality, start, end)


@dataclass(frozen=True)
class EvalLabel:
    modality: str  # "visual" | "audio"
    start: float
    end: float
    note: str = ""

    def __post_init__(self):
        if self.start >= self.end:
            raise FormatError(f"label [{self.start}, {self.end}] is empty")


@dataclass
class ModalityMetrics:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0


@dataclass
class EvalReport:
    method: str  # "crossmodal" | "gaps" | "random"
    overlap_mode: str = "pred"
    seed: int | None = None
    visual: ModalityMetrics = field(default_factory=ModalityMetrics)
    audio: ModalityMetrics = field(default_factory=ModalityMetrics)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "overlap_mode": self.overlap_mode,
            "seed": self.seed,
            "visual": vars(self.visual),
            "audio": vars(self.audio),
        }


def overlap_seconds(a_start: float, a_end: float, b_start: float, b_end: float) -> float:
    return max(0.0, min(a_end, b_end) - max(a_start, b_start))


def _overlap_ratio(pred: Prediction, label: EvalLabel, mode: str) -> float:
    ov = overlap_seconds(pred[1], pred[2], label.start, label.end)
    if mode == "pred":
        denom = pred[2] - pred[1]
    elif mode == "label":
        denom = label.end - label.start
    elif mode == "min":
        denom = min(pred[2] - pred[1], label.end - label.start)
    else:
        raise ValueError(f"unknown overlap mode {mode!r}")
    return ov / denom if denom > 0 else 0.0


def match_predictions(predicted: list[Prediction], labels: list[EvalLabel],
                      mode: str = "pred") -> tuple[int, int, int]:
    """(tp, fp, fn) under the >50% overlap rule, same-modality pairs only."""
    tp = fp = 0
    covered: set[int] = set()
    for pred in predicted:
        hit = False
        for idx, label in enumerate(labels):
            if label.modality != pred[0]:
                continue
            if _overlap_ratio(pred, label, mode) > 0.5:
                hit = True
                covered.add(idx)
        if hit:
            tp += 1
        else:
            fp += 1
    fn = sum(1 for idx in range(len(labels)) if idx not in covered)
    return tp, fp, fn


def metrics(tp: int, fp: int, fn: int) -> ModalityMetrics:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return ModalityMetrics(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1)


def evaluate(predicted: list[Prediction], labels: list[EvalLabel], method: str,
             mode: str = "pred", seed: int | None = None) -> EvalReport:
    report = EvalReport(method=method, overlap_mode=mode, seed=seed)
    for modality in ("visual", "audio"):
        preds = [p for p in predicted if p[0] == modality]
        labs = [l for l in labels if l.modality == modality]
        report.__dict__[modality] = metrics(*match_predictions(preds, labs, mode))
    return report


def baseline_gaps(visual_segments: list[VisualSegment],
                  audio_segments: list[AudioSegment]) -> list[Prediction]:
    """Mark everything outside speech as inaccessible in both modalities."""
    gaps = [s for s in audio_segments if s.kind in (NON_SPEECH, PAUSE)]
    preds: list[Prediction] = []
    for seg in visual_segments:
        mid = seg.midpoint
        if any(g.start <= mid < g.end for g in gaps):
            preds.append(("visual", seg.start, seg.end))
    for g in gaps:
        preds.append(("audio", g.start, g.end))
    return preds


def baseline_random(visual_segments: list[VisualSegment],
                    audio_segments: list[AudioSegment], seed: int) -> list[Prediction]:
    """Flip a seeded coin per segment (visual first, then audio)."""
    rng = random.Random(seed)
    preds: list[Prediction] = []
    for seg in visual_segments:
        if rng.random() < 0.5:
            preds.append(("visual", seg.start, seg.end))
    for seg in audio_segments:
        if rng.random() < 0.5:
            preds.append(("audio", seg.start, seg.end))
    return preds


def load_labels(path: str) -> list[EvalLabel]:
    """Read a label file: either a bare list or {"version": 1, "labels": [...]}."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if isinstance(doc, dict):
        if doc.get("version") != 1:
            raise FormatError(f"{path}: unsupported label file version")
        records = doc.get("labels", [])
    elif isinstance(doc, list):
        records = doc
    else:
        raise FormatError(f"{path}: expected a list or a versioned object")
    try:
        return [
            EvalLabel(modality=r["modality"], start=float(r["start"]),
                      end=float(r["end"]), note=r.get("note", ""))
            for r in records
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: bad label record: {exc}") from exc


__all__ = [
    "EvalLabel",
    "EvalReport",
    "ModalityMetrics",
    "OVERLAP_MODES",
    "Prediction",
    "REFERENCE_RESULTS",
    "baseline_gaps",
    "baseline_random",
    "evaluate",
    "load_labels",
    "match_predictions",
    "metrics",
    "overlap_seconds",
]
