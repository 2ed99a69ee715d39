"""Independent reference implementations used to cross-check the library.

Everything here is written directly from the math, structured differently
from the package code on purpose; keep it free of avasym imports beyond
plain data.
"""

from __future__ import annotations

import math
import re


def brute_force_visual_score(i, vt_values, va_values, visual_spans, audio_segments,
                             w=0.45, period=5.0):
    """Direct double-loop weighted sum for one visual segment.

    ``visual_spans`` is a list of (start, end); ``audio_segments`` a list of
    (kind, start, end).  Matrix arguments are plain nested lists.
    """
    v_mid = (visual_spans[i][0] + visual_spans[i][1]) / 2.0
    total = 0.0
    for j, (kind, a_start, a_end) in enumerate(audio_segments):
        if kind == "pause":
            continue
        a_mid = (a_start + a_end) / 2.0
        weight = w ** (abs(v_mid - a_mid) / period)
        value = vt_values[i][j] if kind == "speech" else va_values[i][j]
        total += weight * value
    return total


def brute_force_audio_score(j, va_values, visual_spans, audio_segments,
                            w=0.45, period=5.0, c=1.0):
    kind, a_start, a_end = audio_segments[j]
    if kind == "speech":
        return c
    if kind == "pause":
        return 0.0
    a_mid = (a_start + a_end) / 2.0
    total = 0.0
    for i, (v_start, v_end) in enumerate(visual_spans):
        v_mid = (v_start + v_end) / 2.0
        weight = w ** (abs(a_mid - v_mid) / period)
        total += weight * va_values[i][j]
    return total


def minmax_reference(values):
    lo, hi = min(values), max(values)
    if hi == lo:
        return [0.5 for _ in values]
    return [(v - lo) / (hi - lo) for v in values]


def audio_kind_at(t, words, duration, pause_gap=0.5, non_speech_gap=2.0):
    """Classify one instant of audio time straight from the gap rules.

    Word runs (gaps under ``pause_gap``) are speech from first start to last
    end; other spans classify by their gap length.  Boundary gaps shorter
    than ``pause_gap`` belong to the adjacent speech run.
    """
    if not words:
        return "non_speech" if duration >= non_speech_gap or duration < pause_gap else "pause"
    runs = [[words[0]]]
    for word in words[1:]:
        if word.start - runs[-1][-1].end < pause_gap:
            runs[-1].append(word)
        else:
            runs.append([word])
    spans = []
    for idx, run in enumerate(runs):
        start, end = run[0].start, run[-1].end
        if idx == 0 and start < pause_gap:
            start = 0.0
        if idx == len(runs) - 1 and duration - end < pause_gap:
            end = duration
        spans.append((start, end))
    for start, end in spans:
        if start <= t < end:
            return "speech"
    # inside some gap: classify by the gap's own length
    prev_end = 0.0
    for start, end in spans:
        if t < start:
            gap = start - prev_end
            return "non_speech" if gap >= non_speech_gap or gap < pause_gap else "pause"
        prev_end = end
    gap = duration - prev_end
    return "non_speech" if gap >= non_speech_gap or gap < pause_gap else "pause"


def srgb_mix_reference(score):
    """Linear-light gray/red blend, written independently of the package."""

    def decode(c):
        x = c / 255.0
        return x / 12.92 if x <= 0.04045 else math.pow((x + 0.055) / 1.055, 2.4)

    def encode(y):
        x = 12.92 * y if y <= 0.0031308 else 1.055 * math.pow(y, 1.0 / 2.4) - 0.055
        return math.floor(x * 255.0 + 0.5)

    gray, red = (128, 128, 128), (220, 38, 38)
    out = []
    for g, r in zip(gray, red):
        y = decode(g) * score + decode(r) * (1.0 - score)
        out.append(encode(y))
    return tuple(out)


_TS_RE = re.compile(r"^(\d{2,}):([0-5]\d):([0-5]\d)\.(\d{3})$")


def parse_webvtt_strict(text):
    """Parse a WebVTT document, raising ValueError on any structural problem.

    Returns a list of (start_seconds, end_seconds, payload) cues.
    """
    lines = text.split("\n")
    if not lines or not lines[0].startswith("WEBVTT"):
        raise ValueError("missing WEBVTT header")
    blocks = []
    current = []
    for line in lines[1:]:
        if line == "":
            if current:
                blocks.append(current)
                current = []
        else:
            current.append(line)
    if current:
        blocks.append(current)

    def parse_ts(token):
        m = _TS_RE.match(token)
        if not m:
            raise ValueError(f"bad timestamp {token!r}")
        h, mnt, s, ms = (int(g) for g in m.groups())
        return h * 3600 + mnt * 60 + s + ms / 1000.0

    cues = []
    last_start = -1.0
    for block in blocks:
        if block[0].startswith("NOTE"):
            continue
        timing_idx = 0
        if "-->" not in block[0]:
            # optional cue identifier line
            timing_idx = 1
            if len(block) < 2 or "-->" not in block[1]:
                raise ValueError(f"block without timing line: {block!r}")
        parts = block[timing_idx].split("-->")
        if len(parts) != 2:
            raise ValueError(f"bad timing line: {block[timing_idx]!r}")
        start = parse_ts(parts[0].strip())
        end = parse_ts(parts[1].strip().split(" ")[0])
        if end <= start:
            raise ValueError(f"cue ends before it starts: {block[timing_idx]!r}")
        if start < last_start:
            raise ValueError("cue start times must be non-decreasing")
        last_start = start
        payload = block[timing_idx + 1:]
        if not payload:
            raise ValueError("cue without payload")
        for line in payload:
            if "-->" in line:
                raise ValueError("cue payload contains '-->'")
        cues.append((start, end, "\n".join(payload)))
    return cues
