import json
import random

import numpy as np
import pytest

from avasym.embedding import Embedding
from avasym.errors import (
    EmptyAxis,
    FormatError,
    IndexOutOfRange,
    ShapeMismatch,
    UnknownSegment,
)
from avasym.grounding import (
    MatchingMatrix,
    TemporalWeightConfig,
    VISUAL_AUDIO,
    VISUAL_TEXT,
    compute_matrix,
    load_matrix_file,
    normalize_scores,
    normalize_values,
    score_audio,
    score_visual,
    temporal_weight,
    top_matches,
)
from avasym.segmentation import AudioSegment, VisualSegment

from oracles import (
    brute_force_audio_score,
    brute_force_visual_score,
    minmax_reference,
)

CFG = TemporalWeightConfig()


def vis(spans):
    return [VisualSegment(f"vis-{i:04d}", i, s, e, (i,)) for i, (s, e) in enumerate(spans)]


def aud(specs):
    return [AudioSegment(f"aud-{j:04d}", j, s, e, kind) for j, (kind, s, e) in enumerate(specs)]


def matrix(kind, values):
    arr = np.asarray(values, dtype=np.float64)
    return MatchingMatrix(kind=kind, values=arr, raw_values=arr)


def unit(vec):
    v = np.asarray(vec, dtype=np.float64)
    return v / np.linalg.norm(v)


class TestTemporalWeight:
    def test_zero_distance(self):
        assert temporal_weight(12.0, 12.0, CFG) == 1.0

    def test_five_seconds(self):
        assert temporal_weight(0.0, 5.0, CFG) == pytest.approx(0.45, abs=1e-12)

    def test_ten_seconds(self):
        assert temporal_weight(0.0, 10.0, CFG) == pytest.approx(0.2025, abs=1e-12)

    def test_symmetry_exact(self):
        rng = random.Random(1)
        for _ in range(200):
            a, b = rng.uniform(0, 300), rng.uniform(0, 300)
            assert temporal_weight(a, b, CFG) == temporal_weight(b, a, CFG)

    def test_matches_direct_exponentiation(self):
        rng = random.Random(2)
        for _ in range(500):
            delta = rng.uniform(0, 120)
            assert temporal_weight(0.0, delta, CFG) == pytest.approx(
                0.45 ** (delta / 5.0), abs=1e-12)

    def test_bounds(self):
        rng = random.Random(3)
        for _ in range(100):
            w = temporal_weight(rng.uniform(0, 60), rng.uniform(0, 60), CFG)
            assert 0.0 < w <= 1.0


class TestComputeMatrix:
    def test_constant_matrix_is_half(self):
        m = compute_matrix([Embedding("v0", "visual", unit([1, 0]))],
                           [Embedding("a0", "text", unit([1, 0]))], VISUAL_TEXT)
        assert m.raw_values[0, 0] == pytest.approx(1.0)
        assert m.values[0, 0] == 0.5

    def test_identity_raw_already_spanning(self):
        vs = [Embedding("v0", "visual", unit([1, 0])), Embedding("v1", "visual", unit([0, 1]))]
        ts = [Embedding("a0", "text", unit([1, 0])), Embedding("a1", "text", unit([0, 1]))]
        m = compute_matrix(vs, ts, VISUAL_TEXT)
        assert np.allclose(m.values, np.eye(2))

    def test_minmax_arithmetic(self):
        # raw [[0.2,0.4],[0.6,1.0]] -> [[0,0.25],[0.5,1.0]]
        assert np.allclose(
            normalize_values(np.array([[0.2, 0.4], [0.6, 1.0]])),
            np.array([[0.0, 0.25], [0.5, 1.0]]))

    def test_flagged_embedding_hits_matrix_minimum(self):
        vs = [Embedding("v0", "visual", unit([1.0, 0.2])),
              Embedding("v1", "visual", unit([0.3, 1.0]))]
        ts = [Embedding("a0", "text", unit([1.0, 0.1])),
              Embedding("a1", "text", np.zeros(2))]  # flagged
        m = compute_matrix(vs, ts, VISUAL_TEXT)
        assert m.values[:, 1].max() == 0.0
        assert m.values.min() == 0.0 and m.values.max() == 1.0

    def test_empty_axis(self):
        with pytest.raises(EmptyAxis):
            compute_matrix([], [Embedding("a0", "text", unit([1, 0]))], VISUAL_TEXT)

    def test_range_invariant(self):
        rng = np.random.default_rng(4)
        vs = [Embedding(f"v{i}", "visual", unit(rng.standard_normal(8))) for i in range(5)]
        ts = [Embedding(f"a{j}", "text", unit(rng.standard_normal(8))) for j in range(7)]
        m = compute_matrix(vs, ts, VISUAL_TEXT)
        assert m.values.min() == 0.0 and m.values.max() == 1.0


def random_instance(rng):
    n_v, n_a = rng.randint(1, 8), rng.randint(1, 8)
    duration = rng.uniform(20, 120)
    v_bounds = sorted(rng.uniform(0, duration) for _ in range(n_v - 1))
    v_edges = [0.0] + v_bounds + [duration]
    a_bounds = sorted(rng.uniform(0, duration) for _ in range(n_a - 1))
    a_edges = [0.0] + a_bounds + [duration]
    kinds = [rng.choice(["speech", "non_speech", "pause"]) for _ in range(n_a)]
    vt = [[rng.random() for _ in range(n_a)] for _ in range(n_v)]
    va = [[rng.random() for _ in range(n_a)] for _ in range(n_v)]
    visual_spans = list(zip(v_edges, v_edges[1:]))
    audio_specs = [(k, s, e) for k, (s, e) in zip(kinds, zip(a_edges, a_edges[1:]))]
    return visual_spans, audio_specs, vt, va


class TestScoringOracle:
    def test_matches_brute_force(self):
        rng = random.Random(42)
        for _ in range(200):
            visual_spans, audio_specs, vt, va = random_instance(rng)
            vsegs, asegs = vis(visual_spans), aud(audio_specs)
            vt_m = matrix(VISUAL_TEXT, vt)
            va_m = matrix(VISUAL_AUDIO, va)
            for i in range(len(vsegs)):
                got = score_visual(i, vt_m, va_m, vsegs, asegs, CFG)
                want = brute_force_visual_score(i, vt, va, visual_spans, audio_specs)
                assert got.raw_score == pytest.approx(want, abs=1e-9)
                assert sum(v for _, v in got.contributions) == pytest.approx(
                    got.raw_score, abs=1e-9)
            for j in range(len(asegs)):
                got = score_audio(j, va_m, vsegs, asegs, CFG)
                want = brute_force_audio_score(j, va, visual_spans, audio_specs)
                assert got.raw_score == pytest.approx(want, abs=1e-9)

    def test_single_colocated_speech(self):
        vsegs = vis([(0.0, 10.0)])
        asegs = aud([("speech", 0.0, 10.0)])
        vt_m = matrix(VISUAL_TEXT, [[0.8]])
        va_m = matrix(VISUAL_AUDIO, [[0.0]])
        assert score_visual(0, vt_m, va_m, vsegs, asegs, CFG).raw_score == pytest.approx(0.8)

    def test_ten_seconds_apart(self):
        vsegs = vis([(0.0, 10.0)])  # midpoint 5
        asegs = aud([("speech", 10.0, 20.0)])  # midpoint 15
        vt_m = matrix(VISUAL_TEXT, [[0.8]])
        va_m = matrix(VISUAL_AUDIO, [[0.0]])
        got = score_visual(0, vt_m, va_m, vsegs, asegs, CFG).raw_score
        assert got == pytest.approx(0.8 * 0.2025, abs=1e-12)

    def test_pause_only_neighbors(self):
        vsegs = vis([(0.0, 4.0)])
        asegs = aud([("pause", 0.0, 1.0), ("pause", 1.0, 4.0)])
        vt_m = matrix(VISUAL_TEXT, [[0.9, 0.9]])
        va_m = matrix(VISUAL_AUDIO, [[0.9, 0.9]])
        got = score_visual(0, vt_m, va_m, vsegs, asegs, CFG)
        assert got.raw_score == 0.0
        assert got.contributions == ()

    def test_speech_audio_fixed(self):
        vsegs = vis([(0.0, 5.0)])
        asegs = aud([("speech", 0.0, 5.0)])
        got = score_audio(0, matrix(VISUAL_AUDIO, [[0.123]]), vsegs, asegs, CFG)
        assert got.fixed and got.score == 1.0

    def test_non_speech_colocated(self):
        vsegs = vis([(0.0, 5.0)])
        asegs = aud([("non_speech", 0.0, 5.0)])
        got = score_audio(0, matrix(VISUAL_AUDIO, [[0.6]]), vsegs, asegs, CFG)
        assert got.raw_score == pytest.approx(0.6)

    def test_zero_row(self):
        vsegs = vis([(0.0, 5.0)])
        asegs = aud([("non_speech", 0.0, 5.0)])
        got = score_audio(0, matrix(VISUAL_AUDIO, [[0.0]]), vsegs, asegs, CFG)
        assert got.raw_score == 0.0

    def test_index_out_of_range(self):
        vsegs, asegs = vis([(0.0, 1.0)]), aud([("speech", 0.0, 1.0)])
        m = matrix(VISUAL_TEXT, [[0.5]])
        with pytest.raises(IndexOutOfRange):
            score_visual(5, m, m, vsegs, asegs, CFG)
        with pytest.raises(IndexOutOfRange):
            score_audio(5, m, vsegs, asegs, CFG)

    def test_monotonic_in_matrix_entry(self):
        vsegs = vis([(0.0, 10.0), (10.0, 20.0)])
        asegs = aud([("speech", 0.0, 10.0), ("speech", 10.0, 20.0)])
        base = [[0.2, 0.3], [0.1, 0.4]]
        va_m = matrix(VISUAL_AUDIO, [[0.0, 0.0], [0.0, 0.0]])
        low = score_visual(0, matrix(VISUAL_TEXT, base), va_m, vsegs, asegs, CFG).raw_score
        bumped = [[0.9, 0.3], [0.1, 0.4]]
        high = score_visual(0, matrix(VISUAL_TEXT, bumped), va_m, vsegs, asegs, CFG).raw_score
        assert high > low


class TestNormalizeScores:
    @staticmethod
    def scored(raws, fixed=None):
        from avasym.grounding import ScoredSegment
        fixed = fixed or [False] * len(raws)
        return [ScoredSegment(f"s{i}", "visual", raw, raw, (), fx)
                for i, (raw, fx) in enumerate(zip(raws, fixed))]

    def test_spread(self):
        out = normalize_scores(self.scored([0.1, 0.5, 0.9]), "visual")
        assert [s.score for s in out] == pytest.approx([0.0, 0.5, 1.0])

    def test_constant_pool(self):
        out = normalize_scores(self.scored([0.3, 0.3]), "visual")
        assert [s.score for s in out] == [0.5, 0.5]

    def test_single_plus_fixed(self):
        out = normalize_scores(self.scored([0.2, 0.7], fixed=[False, True]), "visual")
        assert [s.score for s in out] == [0.5, 1.0]

    def test_order_preserved(self):
        rng = random.Random(9)
        raws = [rng.random() for _ in range(20)]
        out = normalize_scores(self.scored(raws), "visual")
        ranks_raw = np.argsort(raws)
        ranks_norm = np.argsort([s.score for s in out])
        assert list(ranks_raw) == list(ranks_norm)
        assert [s.score for s in out] == pytest.approx(minmax_reference(raws))


class TestTopMatches:
    def make_scored(self):
        vsegs = vis([(0.0, 10.0)])
        asegs = aud([("speech", 0.0, 2.0), ("non_speech", 2.0, 6.0), ("speech", 6.0, 10.0)])
        vt_m = matrix(VISUAL_TEXT, [[0.0, 0.0, 0.9]])
        va_m = matrix(VISUAL_AUDIO, [[0.0, 0.7, 0.0]])
        s = score_visual(0, vt_m, va_m, vsegs, asegs, CFG)
        return {s.segment_id: s}

    def test_top_one(self):
        scored = self.make_scored()
        (top_id, _), = top_matches(scored, "vis-0000", 1)
        assert top_id in ("aud-0001", "aud-0002")

    def test_k_larger_than_contributions(self):
        scored = self.make_scored()
        assert len(top_matches(scored, "vis-0000", 50)) == 3

    def test_unknown_segment(self):
        with pytest.raises(UnknownSegment):
            top_matches(self.make_scored(), "vis-9999", 1)

    def test_tie_broken_by_earlier_start(self):
        vsegs = vis([(0.0, 30.0)])  # midpoint 15
        # two speech segments symmetric around the midpoint with equal values
        asegs = aud([("speech", 0.0, 10.0), ("speech", 20.0, 30.0)])
        vt_m = matrix(VISUAL_TEXT, [[0.5, 0.5]])
        va_m = matrix(VISUAL_AUDIO, [[0.0, 0.0]])
        s = score_visual(0, vt_m, va_m, vsegs, asegs, CFG)
        assert s.contributions[0][0] == "aud-0000"
        assert s.contributions[0][1] == pytest.approx(s.contributions[1][1])


class TestMatrixFile:
    @staticmethod
    def doc(n_v=3, n_a=4, raw=False, value=0.5):
        values = [[value for _ in range(n_a)] for _ in range(n_v)]
        return {"version": 1, "n_v": n_v, "n_a": n_a,
                "visual_text": {"raw": raw, "values": values},
                "visual_audio": {"raw": raw, "values": values}}

    def test_load(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps(self.doc()))
        vt, va = load_matrix_file(str(path), n_v=3, n_a=4)
        assert vt.values.shape == (3, 4)

    def test_shape_mismatch(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps(self.doc(n_v=3, n_a=4)))
        with pytest.raises(ShapeMismatch):
            load_matrix_file(str(path), n_v=5, n_a=4)

    def test_out_of_range_normalized_values(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps(self.doc(value=1.2)))
        with pytest.raises(FormatError):
            load_matrix_file(str(path), n_v=3, n_a=4)

    def test_raw_gets_normalized(self, tmp_path):
        doc = self.doc(raw=True)
        doc["visual_text"]["values"] = [[0.2, 0.4, 0.6, 1.0]] * 3
        path = tmp_path / "m.json"
        path.write_text(json.dumps(doc))
        vt, _ = load_matrix_file(str(path), n_v=3, n_a=4)
        assert vt.values.min() == 0.0 and vt.values.max() == 1.0
