"""Fixed-dimension vectors for visual segments, transcripts, and non-speech
audio, from pluggable providers.

Real analyses load vectors computed offline by large multimodal models (the
``file`` provider).  The ``builtin`` provider is a deterministic toy embedder
for hermetic tests and demos: color histograms, hashed bag-of-words, and log
band energies, pushed through a seed-fixed orthonormal projection.

Segments that carry no signal (empty transcript, silent audio) get a flagged
zero vector and contribute no match downstream.
"""

from __future__ import annotations

import functools
import hashlib
import json
import re
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, FormatError, MissingSegment, NoFrames, WrongKind
from .ingest import AudioTrack, FrameSeries
from .segmentation import NON_SPEECH, AudioSegment, VisualSegment
from .stopwords import STOP_WORDS, STOP_WORDS_VERSION

VISUAL = "visual"
TEXT = "text"
AUDIO = "audio"
MODALITIES = (VISUAL, TEXT, AUDIO)

HIST_BINS_PER_CHANNEL = 16  # 48-dim visual feature
AUDIO_BANDS = 32

_TOKEN_RE = re.compile(r"[\w']+")


@dataclass(frozen=True)
class Embedding:
    segment_id: str
    modality: str
    vector: np.ndarray  # float64; unit norm, or all-zero when flagged

    @property
    def is_zero(self) -> bool:
        return not np.any(self.vector)

    @property
    def dim(self) -> int:
        return self.vector.size


@dataclass(frozen=True)
class EmbeddingProviderConfig:
    provider: str = "builtin"  # "builtin" | "file"
    dim: int = 32
    seed: int = 42
    file_path: str | None = None

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be at least 2")
        if self.provider not in ("builtin", "file"):
            raise ValueError(f"unknown provider {self.provider!r}")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def remove_stop_words(text: str) -> str:
    """Drop stop-list tokens (case-insensitive, punctuation-split)."""
    return " ".join(tok for tok in tokenize(text) if tok not in STOP_WORDS)


def _unit(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        return np.zeros_like(vec)
    return vec / norm


@functools.lru_cache(maxsize=16)
def _rotation(in_dim: int, out_dim: int, seed: int) -> np.ndarray:
    """Seed-fixed orthonormal projection from in_dim to out_dim.

    For out_dim >= in_dim the columns are orthonormal, so raw-feature dot
    products are preserved exactly; for out_dim < in_dim the rows are
    orthonormal and the map is a partial isometry.
    """
    n = max(in_dim, out_dim)
    rng = np.random.default_rng([seed, in_dim, out_dim])
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return (q * signs)[:out_dim, :in_dim]


def _hash64(token: str, seed: int, purpose: bytes) -> int:
    h = hashlib.blake2b(token.encode("utf-8"), digest_size=8,
                        key=seed.to_bytes(8, "little", signed=True), person=purpose)
    return int.from_bytes(h.digest(), "little")


class BuiltinEmbedder:
    """Deterministic toy embedder; output is a pure function of (input, seed, dim)."""

    def __init__(self, dim: int = 32, seed: int = 42):
        if dim < 2:
            raise ValueError("dim must be at least 2")
        self.dim = dim
        self.seed = seed

    def _project(self, feature: np.ndarray) -> np.ndarray:
        return _rotation(feature.size, self.dim, self.seed) @ feature

    def embed_visual(self, segment: VisualSegment, frames: FrameSeries) -> Embedding:
        """Mean per-channel HSV histogram over the representative frames."""
        if not segment.representative_frames:
            raise NoFrames(f"segment {segment.id} has no representative frames")
        bin_width = 256 // HIST_BINS_PER_CHANNEL
        hists = []
        for idx in segment.representative_frames:
            hsv = frames.frames[idx].hsv
            npix = hsv.shape[0] * hsv.shape[1]
            per_channel = [
                np.bincount(hsv[..., c].reshape(-1) // bin_width,
                            minlength=HIST_BINS_PER_CHANNEL) / npix
                for c in range(3)
            ]
            hists.append(np.concatenate(per_channel))
        feature = np.mean(hists, axis=0)
        return Embedding(segment.id, VISUAL, _unit(self._project(feature)))

    def embed_text(self, segment_id: str, transcript: str) -> Embedding:
        """Signed hashed bag-of-words; expects a stop-word-filtered transcript."""
        vec = np.zeros(self.dim)
        for token in transcript.split():
            bucket = _hash64(token, self.seed, b"bucket") % self.dim
            sign = 1.0 if _hash64(token, self.seed, b"sign") & 1 else -1.0
            vec[bucket] += sign
        return Embedding(segment_id, TEXT, _unit(vec))

    def embed_audio(self, segment: AudioSegment, audio: AudioTrack) -> Embedding:
        """log1p-compressed energies of 32 equal-width spectral bands."""
        if segment.kind != NON_SPEECH:
            raise WrongKind(f"segment {segment.id} is {segment.kind}, not {NON_SPEECH}")
        samples = audio.slice(segment.start, segment.end)
        if samples.size == 0 or not np.any(samples):
            return Embedding(segment.id, AUDIO, np.zeros(self.dim))
        magnitude = np.abs(np.fft.rfft(samples))
        bands = np.array_split(magnitude, AUDIO_BANDS)
        feature = np.log1p(np.array([band.mean() for band in bands]))
        return Embedding(segment.id, AUDIO, _unit(self._project(feature)))


def load_embedding_file(path: str,
                        expected: dict[str, list[str]] | None = None) -> list[Embedding]:
    """Load precomputed embeddings; see docs/bundle-format.md for the schema.

    ``expected`` maps modality -> segment ids that must all be covered; any
    gap raises MissingSegment listing the uncovered ids.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc

    if isinstance(doc, list):
        sections = doc
    elif isinstance(doc, dict) and "sections" in doc:
        sections = doc["sections"]
    elif isinstance(doc, dict):
        sections = [doc]
    else:
        raise FormatError(f"{path}: expected an object or a list of sections")

    out: list[Embedding] = []
    for section in sections:
        try:
            version = section["version"]
            modality = section["modality"]
            dim = int(section["dim"])
            records = section["records"]
        except (KeyError, TypeError) as exc:
            raise FormatError(f"{path}: missing field {exc}") from exc
        if version != 1:
            raise FormatError(f"{path}: unsupported embedding file version {version}")
        if modality not in MODALITIES:
            raise FormatError(f"{path}: unknown modality {modality!r}")
        for rec in records:
            vec = np.asarray(rec["vector"], dtype=np.float64)
            if vec.size != dim:
                raise DimensionMismatch(
                    f"{path}: record {rec.get('segment_id')} has {vec.size} values, expected {dim}"
                )
            out.append(Embedding(str(rec["segment_id"]), modality, _unit(vec)))

    dims = {e.dim for e in out}
    if len(dims) > 1:
        raise DimensionMismatch(f"{path}: mixed dims {sorted(dims)}")

    if expected:
        covered: dict[str, set[str]] = {}
        for e in out:
            covered.setdefault(e.modality, set()).add(e.segment_id)
        missing = {
            modality: sorted(set(ids) - covered.get(modality, set()))
            for modality, ids in expected.items()
        }
        missing = {m: ids for m, ids in missing.items() if ids}
        if missing:
            raise MissingSegment(f"{path}: uncovered segments {missing}", detail=missing)
    return out


__all__ = [
    "AUDIO",
    "AUDIO_BANDS",
    "BuiltinEmbedder",
    "Embedding",
    "EmbeddingProviderConfig",
    "HIST_BINS_PER_CHANNEL",
    "MODALITIES",
    "STOP_WORDS",
    "STOP_WORDS_VERSION",
    "TEXT",
    "VISUAL",
    "load_embedding_file",
    "remove_stop_words",
    "tokenize",
]
