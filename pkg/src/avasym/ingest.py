"""Load a media bundle (frames, audio, transcript, sidecars) into memory.

A bundle is a directory described by a ``bundle.toml`` manifest; see
docs/bundle-format.md.  Frames are converted to 8-bit HSV exactly once, here,
and every downstream module works on the resulting :class:`MediaBundle` only.
"""

from __future__ import annotations

import json
import os
import shlex
import subprocess
import wave
from dataclasses import dataclass, field, replace

import numpy as np
from PIL import Image

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .errors import (
    DecodeFailed,
    DecoderUnavailable,
    DurationMismatch,
    MalformedPart,
    MissingPart,
)

DEFAULT_FPS = 1.0
DEFAULT_SAMPLE_RATE = 16000
FRAME_PATTERN = "frame_%06d.png"
DECODER_ENV_VAR = "AVASYM_DECODER"

# how far the frame/audio/word spans may disagree with the declared duration
DURATION_TOLERANCE = 1.0


@dataclass(frozen=True)
class Frame:
    t: float
    hsv: np.ndarray  # (height, width, 3) uint8, Pillow HSV scale (all 0-255)


@dataclass(frozen=True)
class FrameSeries:
    fps: float
    frames: tuple[Frame, ...]

    def __post_init__(self):
        ts = [f.t for f in self.frames]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise MalformedPart("frame timestamps must be strictly increasing")
        shapes = {f.hsv.shape for f in self.frames}
        if len(shapes) > 1:
            raise MalformedPart(f"frames have mixed dimensions: {sorted(shapes)}")

    @property
    def span(self) -> float:
        return len(self.frames) / self.fps


@dataclass(frozen=True)
class AudioTrack:
    sample_rate: int
    samples: np.ndarray  # mono float64 in [-1, 1]

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise MalformedPart("sample_rate must be positive")
        if self.samples.size and (np.abs(self.samples) > 1.0).any():
            raise MalformedPart("audio samples must lie in [-1, 1]")

    @property
    def span(self) -> float:
        return self.samples.size / self.sample_rate

    def slice(self, start: float, end: float) -> np.ndarray:
        lo = max(0, int(round(start * self.sample_rate)))
        hi = min(self.samples.size, int(round(end * self.sample_rate)))
        return self.samples[lo:hi]


@dataclass(frozen=True)
class WordTiming:
    word: str
    start: float
    end: float


@dataclass(frozen=True)
class FaceEntry:
    t: float
    boxes: tuple[tuple[float, float, float, float], ...]  # (x, y, w, h) px


@dataclass(frozen=True)
class FaceSidecar:
    entries: tuple[FaceEntry, ...]
    frame_width: int
    frame_height: int


@dataclass(frozen=True)
class MediaBundle:
    video_id: str
    duration: float
    frames: FrameSeries
    audio: AudioTrack
    words: tuple[WordTiming, ...]
    face_sidecar: FaceSidecar | None = None
    embedding_sidecar: str | None = None  # path to an embedding file
    matrix_sidecar: str | None = None  # path to a matrix file
    source_dir: str | None = None


def _require(manifest: dict, key: str, part: str):
    if key not in manifest:
        raise MissingPart(part)
    return manifest[key]


def _part_path(root: str, rel: str, part: str) -> str:
    path = os.path.join(root, rel)
    if not os.path.exists(path):
        raise MissingPart(part)
    return path


def load_frames(frames_dir: str, fps: float, colorspace: str = "rgb") -> FrameSeries:
    """Read numbered frame PNGs; pixels come back in 8-bit HSV.

    ``colorspace`` names how the PNG channels are to be interpreted: normal
    bundles ship RGB images, while bundles written by :func:`save_bundle` mark
    their PNGs as raw HSV planes so the round trip is lossless.
    """
    if fps <= 0:
        raise MalformedPart("fps must be positive")
    frames = []
    index = 0
    while True:
        path = os.path.join(frames_dir, FRAME_PATTERN % index)
        if not os.path.exists(path):
            break
        with Image.open(path) as img:
            if colorspace == "hsv":
                hsv = np.asarray(img.convert("RGB"), dtype=np.uint8)
            else:
                hsv = np.asarray(img.convert("RGB").convert("HSV"), dtype=np.uint8)
        frames.append(Frame(t=index / fps, hsv=hsv))
        index += 1
    if not frames:
        raise MissingPart("frames")
    return FrameSeries(fps=fps, frames=tuple(frames))


def load_wav(path: str) -> AudioTrack:
    """Read a 16-bit PCM RIFF/WAVE file as normalized mono samples."""
    try:
        with wave.open(path, "rb") as wf:
            if wf.getsampwidth() != 2:
                raise MalformedPart(f"{path}: expected 16-bit PCM, got {8 * wf.getsampwidth()}-bit")
            rate = wf.getframerate()
            n_channels = wf.getnchannels()
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        raise MalformedPart(f"{path}: {exc}") from exc
    data = np.frombuffer(raw, dtype="<i2").astype(np.float64)
    if n_channels > 1:
        data = data.reshape(-1, n_channels).mean(axis=1)
    return AudioTrack(sample_rate=rate, samples=data / 32768.0)


def save_wav(track: AudioTrack, path: str):
    data = np.clip(np.round(track.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(path, "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(track.sample_rate)
        wf.writeframes(data.tobytes())


def load_transcript(path: str) -> tuple[WordTiming, ...]:
    """Parse ``word<TAB>start<TAB>end`` lines into sorted word timings."""
    words = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise MalformedPart(f"{path}:{lineno}: expected 3 tab-separated fields")
            try:
                start, end = float(parts[1]), float(parts[2])
            except ValueError as exc:
                raise MalformedPart(f"{path}:{lineno}: bad timestamp") from exc
            if start >= end:
                raise MalformedPart(f"{path}:{lineno}: start must be before end")
            words.append(WordTiming(word=parts[0], start=start, end=end))
    for prev, cur in zip(words, words[1:]):
        if cur.start < prev.start:
            raise MalformedPart(f"{path}: words not sorted by start time")
        if cur.start < prev.end:
            raise MalformedPart(f"{path}: overlapping words {prev.word!r} and {cur.word!r}")
    return tuple(words)


def load_faces(path: str) -> FaceSidecar:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedPart(f"{path}: {exc}") from exc
    try:
        width, height = int(doc["frame_width"]), int(doc["frame_height"])
        entries = []
        for rec in doc["entries"]:
            boxes = tuple(
                (float(b["x"]), float(b["y"]), float(b["w"]), float(b["h"]))
                for b in rec["boxes"]
            )
            entries.append(FaceEntry(t=float(rec["t"]), boxes=boxes))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedPart(f"{path}: {exc}") from exc
    for prev, cur in zip(entries, entries[1:]):
        if cur.t <= prev.t:
            raise MalformedPart(f"{path}: face timestamps must be increasing")
    for entry in entries:
        for x, y, w, h in entry.boxes:
            if x < 0 or y < 0 or w <= 0 or h <= 0 or x + w > width or y + h > height:
                raise MalformedPart(f"{path}: face box outside frame bounds at t={entry.t}")
    return FaceSidecar(entries=tuple(entries), frame_width=width, frame_height=height)


def load_bundle(path: str) -> MediaBundle:
    """Load and validate the bundle directory at ``path``.

    Raises MissingPart / MalformedPart naming the offending part, and
    DurationMismatch when frames, audio, or transcript disagree with the
    declared duration by more than one second.
    """
    manifest_path = os.path.join(path, "bundle.toml")
    if not os.path.exists(manifest_path):
        raise MissingPart("manifest")
    try:
        with open(manifest_path, "rb") as fh:
            manifest = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise MalformedPart(f"manifest: {exc}") from exc

    video_id = str(_require(manifest, "video_id", "manifest"))
    duration = float(_require(manifest, "duration", "manifest"))
    if duration <= 0:
        raise MalformedPart("manifest: duration must be positive")

    fps = float(manifest.get("fps", DEFAULT_FPS))
    decoded_audio = None
    if "frames_dir" in manifest:
        frames_dir = _part_path(path, manifest["frames_dir"], "frames")
        colorspace = manifest.get("frames_colorspace", "rgb")
        frames = load_frames(frames_dir, fps=fps, colorspace=colorspace)
    elif "video_file" in manifest:
        video_file = _part_path(path, manifest["video_file"], "video")
        frames, decoded_audio = decode_external(video_file, fps=fps)
    else:
        raise MissingPart("frames")

    if "audio_file" in manifest:
        audio = load_wav(_part_path(path, manifest["audio_file"], "audio"))
    elif decoded_audio is not None:
        audio = decoded_audio
    else:
        raise MissingPart("audio")

    words = load_transcript(_part_path(path, _require(manifest, "transcript_file", "transcript"), "transcript"))

    faces = None
    if "faces_file" in manifest:
        faces = load_faces(_part_path(path, manifest["faces_file"], "faces"))

    embedding_sidecar = None
    if "embeddings_file" in manifest:
        embedding_sidecar = _part_path(path, manifest["embeddings_file"], "embeddings")
    matrix_sidecar = None
    if "matrices_file" in manifest:
        matrix_sidecar = _part_path(path, manifest["matrices_file"], "matrices")

    if abs(frames.span - duration) > DURATION_TOLERANCE:
        raise DurationMismatch(
            f"frames span {frames.span:.3f}s vs declared duration {duration:.3f}s"
        )
    if abs(audio.span - duration) > DURATION_TOLERANCE:
        raise DurationMismatch(
            f"audio span {audio.span:.3f}s vs declared duration {duration:.3f}s"
        )
    if words and (words[0].start < -DURATION_TOLERANCE or words[-1].end > duration + DURATION_TOLERANCE):
        raise DurationMismatch(
            f"transcript spans [{words[0].start:.3f}, {words[-1].end:.3f}]s vs duration {duration:.3f}s"
        )
    for w in words:
        if w.start < 0 or w.end > duration:
            raise MalformedPart(f"transcript: word {w.word!r} outside [0, {duration}]")

    return MediaBundle(
        video_id=video_id,
        duration=duration,
        frames=frames,
        audio=audio,
        words=words,
        face_sidecar=faces,
        embedding_sidecar=embedding_sidecar,
        matrix_sidecar=matrix_sidecar,
        source_dir=os.path.abspath(path),
    )


def save_bundle(bundle: MediaBundle, path: str):
    """Write ``bundle`` out as a loadable bundle directory.

    Frame PNGs carry the HSV planes directly (flagged in the manifest) so
    that save -> load is exact; Pillow's HSV<->RGB pair is not.
    """
    os.makedirs(path, exist_ok=True)
    frames_dir = os.path.join(path, "frames")
    os.makedirs(frames_dir, exist_ok=True)
    for i, frame in enumerate(bundle.frames.frames):
        Image.fromarray(frame.hsv, "RGB").save(os.path.join(frames_dir, FRAME_PATTERN % i))
    save_wav(bundle.audio, os.path.join(path, "audio.wav"))
    with open(os.path.join(path, "transcript.tsv"), "w", encoding="utf-8") as fh:
        for w in bundle.words:
            fh.write(f"{w.word}\t{w.start!r}\t{w.end!r}\n")
    lines = [
        f'video_id = "{bundle.video_id}"',
        f"duration = {bundle.duration!r}",
        f"fps = {bundle.frames.fps!r}",
        'frames_dir = "frames"',
        'frames_colorspace = "hsv"',
        'audio_file = "audio.wav"',
        'transcript_file = "transcript.tsv"',
    ]
    if bundle.face_sidecar is not None:
        faces = bundle.face_sidecar
        doc = {
            "frame_width": faces.frame_width,
            "frame_height": faces.frame_height,
            "entries": [
                {"t": e.t, "boxes": [{"x": x, "y": y, "w": w, "h": h} for x, y, w, h in e.boxes]}
                for e in faces.entries
            ],
        }
        with open(os.path.join(path, "faces.json"), "w", encoding="utf-8") as fh:
            json.dump(doc, fh)
        lines.append('faces_file = "faces.json"')
    with open(os.path.join(path, "bundle.toml"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def decode_external(video_path: str, fps: float, sample_rate: int = DEFAULT_SAMPLE_RATE,
                    command_template: str | None = None) -> tuple[FrameSeries, AudioTrack]:
    """Run the configured external decoder and ingest its outputs.

    The command template (``AVASYM_DECODER`` env var by default) receives
    ``{input}``, ``{frames}`` (output pattern), ``{fps}``, ``{audio}`` and
    ``{rate}`` placeholders; exit code 0 means success.
    """
    if fps <= 0:
        raise MalformedPart("fps must be positive")
    template = command_template or os.environ.get(DECODER_ENV_VAR)
    if not template:
        raise DecoderUnavailable(f"no decoder configured; set {DECODER_ENV_VAR}")
    if not os.path.exists(video_path):
        raise DecodeFailed(f"input not found: {video_path}")

    import tempfile

    with tempfile.TemporaryDirectory(prefix="avasym-decode-") as tmp:
        frames_pattern = os.path.join(tmp, FRAME_PATTERN)
        audio_out = os.path.join(tmp, "audio.wav")
        argv = [
            part.format(input=video_path, frames=frames_pattern, fps=fps,
                        audio=audio_out, rate=sample_rate)
            for part in shlex.split(template)
        ]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True)
        except FileNotFoundError as exc:
            raise DecoderUnavailable(f"decoder not runnable: {argv[0]}") from exc
        if proc.returncode != 0:
            raise DecodeFailed(
                f"decoder exited {proc.returncode}", detail={"stderr": proc.stderr[-2000:]}
            )
        frames = load_frames(tmp, fps=fps)
        audio = load_wav(audio_out)
    return frames, audio


__all__ = [
    "AudioTrack",
    "FaceEntry",
    "FaceSidecar",
    "Frame",
    "FrameSeries",
    "MediaBundle",
    "WordTiming",
    "decode_external",
    "load_bundle",
    "load_faces",
    "load_frames",
    "load_transcript",
    "load_wav",
    "save_bundle",
    "save_wav",
]
