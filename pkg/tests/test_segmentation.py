import random

import numpy as np
import pytest

from avasym.errors import EmptyFrames, OverlappingWords
from avasym.ingest import Frame, FrameSeries, WordTiming
from avasym.segmentation import (
    assign_transcripts,
    detect_shots,
    frame_delta,
    segment_audio,
)

from cases_segmentation import CASES
from oracles import audio_kind_at

# Pillow 8-bit HSV values for saturated red and blue
HSV_RED = (0, 255, 255)
HSV_BLUE = (170, 255, 255)


def solid_frames(specs, fps=1.0):
    """specs: list of HSV triples, one frame each at 1/fps spacing."""
    frames = tuple(
        Frame(t=i / fps, hsv=np.full((6, 8, 3), hsv, dtype=np.uint8))
        for i, hsv in enumerate(specs)
    )
    return FrameSeries(fps=fps, frames=frames)


def words_of(pairs):
    return [WordTiming(word=w, start=s, end=e) for w, s, e in pairs]


class TestDetectShots:
    def test_identical_frames_single_segment(self):
        frames = solid_frames([HSV_RED] * 10)
        segs = detect_shots(frames, 27.0)
        assert len(segs) == 1
        assert (segs[0].start, segs[0].end) == (0.0, 10.0)
        assert segs[0].representative_frames == tuple(range(10))

    def test_red_blue_cut(self):
        # mean HSV delta red->blue is |170-0|/3 = 56.67 > 27
        frames = solid_frames([HSV_RED] * 5 + [HSV_BLUE] * 5)
        segs = detect_shots(frames, 27.0)
        assert [(s.start, s.end) for s in segs] == [(0.0, 5.0), (5.0, 10.0)]
        assert segs[0].representative_frames == (0, 1, 2, 3, 4)
        assert segs[1].representative_frames == (5, 6, 7, 8, 9)

    def test_unreachable_threshold(self):
        frames = solid_frames([HSV_RED] * 5 + [HSV_BLUE] * 5)
        assert len(detect_shots(frames, 1e6)) == 1

    def test_empty_frames(self):
        with pytest.raises(EmptyFrames):
            detect_shots(FrameSeries(fps=1.0, frames=()), 27.0)

    def test_non_positive_threshold(self):
        with pytest.raises(ValueError):
            detect_shots(solid_frames([HSV_RED]), 0.0)

    def test_threshold_monotonicity(self):
        rng = np.random.default_rng(11)
        specs = [tuple(rng.integers(0, 256, 3)) for _ in range(30)]
        frames = solid_frames(specs)
        counts = [len(detect_shots(frames, th)) for th in (5, 15, 30, 60, 120, 250)]
        assert counts == sorted(counts, reverse=True)

    def test_tiling(self):
        rng = np.random.default_rng(12)
        specs = [tuple(rng.integers(0, 256, 3)) for _ in range(25)]
        segs = detect_shots(solid_frames(specs), 40.0, duration=25.0)
        assert segs[0].start == 0.0 and segs[-1].end == 25.0
        for a, b in zip(segs, segs[1:]):
            assert a.end == b.start

    def test_frame_delta_scale(self):
        a = np.full((4, 4, 3), (10, 20, 30), dtype=np.uint8)
        b = np.full((4, 4, 3), (40, 20, 30), dtype=np.uint8)
        assert frame_delta(a, b) == pytest.approx(10.0)  # 30/3 channels


class TestSegmentAudio:
    @pytest.mark.parametrize("name,word_specs,duration,expected",
                             CASES, ids=[c[0] for c in CASES])
    def test_hand_constructed_cases(self, name, word_specs, duration, expected):
        got = segment_audio(words_of(word_specs), duration)
        assert [(s.kind, s.start, s.end, s.transcript) for s in got] == expected

    def test_overlap_rejected(self):
        with pytest.raises(OverlappingWords):
            segment_audio(words_of([("a", 0.0, 1.0), ("b", 0.5, 1.5)]), 2.0)

    def test_tiling_and_totality_random(self):
        rng = random.Random(7)
        for _ in range(50):
            duration = rng.uniform(5, 40)
            words = []
            t = rng.uniform(0, 3)
            while t < duration - 0.6:
                end = min(t + rng.uniform(0.1, 0.6), duration)
                words.append(WordTiming("w%d" % len(words), t, end))
                t = end + rng.choice([0.05, 0.2, 0.4, 0.6, 1.0, 2.5])
            segs = segment_audio(words, duration)
            assert segs[0].start == 0.0
            assert segs[-1].end == pytest.approx(duration)
            total = sum(s.end - s.start for s in segs)
            assert total == pytest.approx(duration, abs=1e-6)
            for a, b in zip(segs, segs[1:]):
                assert a.end == b.start
            # every instant belongs to exactly one kind; cross-check midpoints
            for seg in segs:
                mid = (seg.start + seg.end) / 2
                assert audio_kind_at(mid, tuple(words), duration) == seg.kind

    def test_determinism(self):
        words = words_of([("a", 0.3, 0.8), ("b", 1.0, 1.6), ("c", 4.1, 4.4)])
        assert segment_audio(words, 6.0) == segment_audio(words, 6.0)

    def test_invariant_lengths(self):
        words = words_of([("a", 0.0, 1.0), ("b", 3.5, 4.0), ("c", 9.0, 9.5)])
        for seg in segment_audio(words, 12.0):
            if seg.kind == "non_speech":
                assert seg.end - seg.start >= 2.0
            elif seg.kind == "pause":
                assert 0.5 <= seg.end - seg.start < 2.0


class TestAssignTranscripts:
    def test_containment(self):
        words = words_of([("hello", 0.0, 0.4), ("there", 0.5, 0.9)])
        segs = segment_audio(words, 1.0)
        segs = assign_transcripts(segs, words)
        assert segs[0].transcript == "hello there"

    def test_non_speech_empty(self):
        segs = assign_transcripts(segment_audio([], 5.0), [])
        assert segs[0].transcript == ""

    def test_straddling_word_goes_by_midpoint(self):
        # the second run starts at 2.0; a word at (1.9, 2.3) has midpoint 2.1
        # and must land in the segment containing 2.1
        words = words_of([("a", 0.0, 1.0), ("b", 1.9, 2.3), ("c", 2.4, 3.0)])
        segs = segment_audio(words, 3.0)
        relabeled = assign_transcripts(segs, words)
        by_kind = {(s.start, s.end): s.transcript for s in relabeled if s.kind == "speech"}
        assert by_kind[(1.9, 3.0)] == "b c"
        assert by_kind[(0.0, 1.0)] == "a"
