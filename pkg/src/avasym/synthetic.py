"""Deterministic 60-second demo bundle with planted accessibility problems.

The layout plants four situations the pipeline must tell apart:

* shot B: a color change during silence, described nowhere -> open visual issue
* shot C: a presenter face with co-located speech -> suppressed (presenter)
* an off-screen tone between speech runs -> open audio issue
* a silent gap under shot B -> suppressed (silence)

The palette and transcripts below were chosen with a scratch search so that
the builtin embedder at seed 42 separates matched from unmatched pairs with a
comfortable margin; see tests/test_acceptance.py for the assertions.
"""

from __future__ import annotations

import json
import os

import numpy as np
from PIL import Image

from .ingest import (
    AudioTrack,
    FaceEntry,
    FaceSidecar,
    Frame,
    FrameSeries,
    MediaBundle,
    WordTiming,
    save_wav,
)

VIDEO_ID = "synthetic-demo-60s"
DURATION = 60.0
FPS = 1.0
SAMPLE_RATE = 16000
FRAME_SIZE = (160, 90)  # analysis-resolution thumbnails
WORD_LENGTH = 0.45

# shot boundaries (seconds) and solid RGB fill per shot
SHOT_BOUNDARIES = [0.0, 10.0, 20.0, 35.0, 50.0, 60.0]
SHOT_COLORS = [
    (90, 100, 110),   # A: intro scene
    (100, 220, 210),  # B: undescribed color change over silence
    (210, 180, 120),  # C: presenter shot
    (220, 120, 150),  # D: footage under the off-screen tone
    (120, 60, 140),   # E: outro scene
]

# speech runs: (start, end, words); gaps inside a run stay under 0.5 s
SPEECH_RUNS = [
    (0.0, 9.5,
     "welcome back today we bake a bright lemon tart with fresh zest".split()),
    (20.2, 34.6,
     ("thanks for watching everyone remember to share your results and tell "
      "your friends about the channel before you leave today").split()),
    (50.4, 60.0,
     "finally dust the top with sugar and serve the tart warm".split()),
]

TONE_SPAN = (34.6, 50.4)
TONE_FREQ = 440.0
TONE_AMPLITUDE = 0.35
SPEECH_HUM_AMPLITUDE = 0.12

# face sidecar: one dominant box per second across the presenter shot,
# at the original 720p detection resolution (metric 300*250 = 75000 px^2/s)
FACE_SPAN = (20, 35)
FACE_BOX = (500.0, 150.0, 300.0, 250.0)
FACE_FRAME_SIZE = (1280, 720)

# hand-derived ground truth for the planted problems
EXPECTED_AUDIO_SEGMENTS = [
    ("speech", 0.0, 9.5),
    ("non_speech", 9.5, 20.2),
    ("speech", 20.2, 34.6),
    ("non_speech", 34.6, 50.4),
    ("speech", 50.4, 60.0),
]
PLANTED_VISUAL_ISSUE_SHOT = 1  # shot B
PLANTED_PRESENTER_SHOT = 2  # shot C
PLANTED_AUDIO_ISSUE_INDEX = 3  # the tone segment
PLANTED_SILENCE_INDEX = 1  # the silent gap

EVAL_LABELS = [
    {"modality": "visual", "start": 10.0, "end": 20.0, "note": "scene change never described"},
    {"modality": "audio", "start": 34.6, "end": 50.4, "note": "off-screen tone"},
]


def make_words() -> tuple[WordTiming, ...]:
    words = []
    for start, end, tokens in SPEECH_RUNS:
        n = len(tokens)
        step = (end - start - WORD_LENGTH) / (n - 1)
        assert step - WORD_LENGTH < 0.5, "intra-run gap would split the speech run"
        for i, token in enumerate(tokens):
            s = start + i * step
            words.append(WordTiming(word=token, start=s, end=min(s + WORD_LENGTH, end)))
    return tuple(words)


def make_frames() -> FrameSeries:
    w, h = FRAME_SIZE
    frames = []
    n = int(DURATION * FPS)
    for i in range(n):
        t = i / FPS
        shot = sum(1 for b in SHOT_BOUNDARIES[1:-1] if t >= b)
        rgb = Image.new("RGB", (w, h), SHOT_COLORS[shot])
        frames.append(Frame(t=t, hsv=np.asarray(rgb.convert("HSV"), dtype=np.uint8)))
    return FrameSeries(fps=FPS, frames=tuple(frames))


def make_audio() -> AudioTrack:
    n = int(DURATION * SAMPLE_RATE)
    t = np.arange(n) / SAMPLE_RATE
    samples = np.zeros(n)
    for start, end, _ in SPEECH_RUNS:
        mask = (t >= start) & (t < end)
        hum = np.sin(2 * np.pi * 150.0 * t[mask]) + 0.5 * np.sin(2 * np.pi * 310.0 * t[mask])
        samples[mask] = SPEECH_HUM_AMPLITUDE * hum / 1.5
    mask = (t >= TONE_SPAN[0]) & (t < TONE_SPAN[1])
    samples[mask] = TONE_AMPLITUDE * np.sin(2 * np.pi * TONE_FREQ * t[mask])
    return AudioTrack(sample_rate=SAMPLE_RATE, samples=samples)


def make_faces() -> FaceSidecar:
    entries = [
        FaceEntry(t=float(sec), boxes=(FACE_BOX,))
        for sec in range(FACE_SPAN[0], FACE_SPAN[1])
    ]
    return FaceSidecar(entries=tuple(entries),
                       frame_width=FACE_FRAME_SIZE[0], frame_height=FACE_FRAME_SIZE[1])


def build_bundle() -> MediaBundle:
    """The fixture as an in-memory bundle (identical to loading the written one)."""
    return MediaBundle(
        video_id=VIDEO_ID,
        duration=DURATION,
        frames=make_frames(),
        audio=make_audio(),
        words=make_words(),
        face_sidecar=make_faces(),
    )


def write_synthetic_bundle(out_dir: str) -> dict[str, str]:
    """Write the fixture as a normal RGB bundle plus an eval label file."""
    os.makedirs(out_dir, exist_ok=True)
    frames_dir = os.path.join(out_dir, "frames")
    os.makedirs(frames_dir, exist_ok=True)

    w, h = FRAME_SIZE
    n = int(DURATION * FPS)
    for i in range(n):
        t = i / FPS
        shot = sum(1 for b in SHOT_BOUNDARIES[1:-1] if t >= b)
        Image.new("RGB", (w, h), SHOT_COLORS[shot]).save(
            os.path.join(frames_dir, f"frame_{i:06d}.png"))

    save_wav(make_audio(), os.path.join(out_dir, "audio.wav"))

    with open(os.path.join(out_dir, "transcript.tsv"), "w", encoding="utf-8") as fh:
        for word in make_words():
            fh.write(f"{word.word}\t{word.start!r}\t{word.end!r}\n")

    faces = make_faces()
    with open(os.path.join(out_dir, "faces.json"), "w", encoding="utf-8") as fh:
        json.dump({
            "frame_width": faces.frame_width,
            "frame_height": faces.frame_height,
            "entries": [
                {"t": e.t, "boxes": [{"x": x, "y": y, "w": bw, "h": bh}
                                     for x, y, bw, bh in e.boxes]}
                for e in faces.entries
            ],
        }, fh, indent=2)

    with open(os.path.join(out_dir, "bundle.toml"), "w", encoding="utf-8") as fh:
        fh.write("\n".join([
            f'video_id = "{VIDEO_ID}"',
            f"duration = {DURATION!r}",
            f"fps = {FPS!r}",
            'frames_dir = "frames"',
            'audio_file = "audio.wav"',
            'transcript_file = "transcript.tsv"',
            'faces_file = "faces.json"',
        ]) + "\n")

    labels_path = os.path.join(out_dir, "labels.json")
    with open(labels_path, "w", encoding="utf-8") as fh:
        json.dump({"version": 1, "labels": EVAL_LABELS}, fh, indent=2)

    return {"bundle": os.path.abspath(out_dir), "labels": os.path.abspath(labels_path)}


__all__ = [
    "DURATION",
    "EVAL_LABELS",
    "EXPECTED_AUDIO_SEGMENTS",
    "PLANTED_AUDIO_ISSUE_INDEX",
    "PLANTED_PRESENTER_SHOT",
    "PLANTED_SILENCE_INDEX",
    "PLANTED_VISUAL_ISSUE_SHOT",
    "SHOT_BOUNDARIES",
    "SHOT_COLORS",
    "VIDEO_ID",
    "build_bundle",
    "write_synthetic_bundle",
]
