import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avpress.core import AudioChunk, InterleavedStream, SelectionMask, VisualChunk
from avpress.selection import SemanticScores
from avpress.temporal import (
    adjacent_similarities,
    boundaries,
    depth_scores,
    fixed_segments,
    greedy_merge,
    make_segments,
    online_filter,
    segment_selection,
)

from scalar_reference import brute_force_depth, scalar_cosine


def stream_from_visual_rows(rows_per_chunk, f=1, h=1, w=None, audio_rows=None):
    """Build a stream whose per-chunk visual rows are given explicitly."""
    chunks = []
    for i, rows in enumerate(rows_per_chunk):
        rows = np.asarray(rows, dtype=np.float32)
        width = w if w is not None else rows.shape[0]
        audio = (
            np.asarray(audio_rows[i], dtype=np.float32)
            if audio_rows is not None
            else np.ones((1, 2), dtype=np.float32)
        )
        chunks.append((VisualChunk(f, h, width, rows), AudioChunk(audio)))
    return InterleavedStream(tuple(chunks))


class TestAdjacentSimilarities:
    def test_identical_chunks_give_ones(self):
        rows = np.random.default_rng(0).standard_normal((4, 3)).astype(np.float32)
        stream = stream_from_visual_rows([rows] * 5, h=2, w=2)
        sims = adjacent_similarities(stream)
        np.testing.assert_allclose(sims.visual, 1.0, atol=1e-6)
        np.testing.assert_allclose(sims.audio, 1.0, atol=1e-6)

    def test_single_chunk_is_empty(self):
        stream = stream_from_visual_rows([np.ones((2, 3))], h=1, w=2)
        sims = adjacent_similarities(stream)
        assert sims.visual.size == 0 and sims.audio.size == 0

    def test_hand_set_means_match_direct_formula(self):
        # single-token chunks: the chunk mean is the token itself
        means = [np.array([[1.0, 0.0]]), np.array([[1.0, 1.0]]), np.array([[0.0, 1.0]])]
        stream = stream_from_visual_rows(means)
        sims = adjacent_similarities(stream)
        expected = [scalar_cosine(means[0][0], means[1][0]), scalar_cosine(means[1][0], means[2][0])]
        np.testing.assert_allclose(sims.visual, expected, atol=1e-6)


class TestDepthScores:
    def test_constant_sims_are_flat(self):
        np.testing.assert_array_equal(depth_scores(np.full(6, 0.7), 7), np.zeros(6))

    def test_valley_by_hand(self):
        depth = depth_scores(np.array([0.9, 0.2, 0.9]), 4)
        np.testing.assert_allclose(depth, [0.0, 1.4, 0.0], atol=1e-9)

    @given(st.integers(4, 40), st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_peaks_are_never_valleys(self, t, seed):
        # a position holding the global maximum can never be flagged:
        # both one-sided maxima are <= s_t, so its depth is <= 0
        rng = np.random.default_rng(seed)
        sims = rng.uniform(-1, 1, size=t - 1)
        depth = depth_scores(sims, t)
        peak = sims == sims.max()
        assert np.all(depth[peak] <= 1e-12)

    def test_flat_then_step_flags_the_base_of_the_rise(self):
        # global one-sided maxima mean a sharp rise scores positive depth at
        # its base, even though the sequence is monotone
        depth = depth_scores(np.array([0.1, 0.2, 0.9]), 4)
        assert depth[1] == pytest.approx(0.1 + 0.9 - 0.4, abs=1e-12)

    @given(st.integers(2, 200), st.integers(0, 2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_matches_brute_force(self, t, seed):
        rng = np.random.default_rng(seed)
        sims = rng.uniform(-1, 1, size=t - 1)
        got = depth_scores(sims, t)
        expected = brute_force_depth(sims.tolist(), t)
        np.testing.assert_allclose(got, expected, atol=1e-6)
        if t >= 2:
            assert got[0] == 0.0 and got[-1] == 0.0

    def test_length_checked(self):
        with pytest.raises(ValueError, match="expected"):
            depth_scores(np.zeros(3), 3)


class TestBoundaries:
    def test_all_zero_scores_flag_nothing(self):
        assert boundaries(np.zeros(5), np.zeros(5), 0.5).size == 0

    def test_flagged_valley_starts_segment_after_the_pair(self):
        dv = depth_scores(np.array([0.9, 0.2, 0.9]), 4)
        # the valley sits at pair (1, 2), so chunk 2 opens the new segment
        np.testing.assert_array_equal(boundaries(dv, np.zeros(3), 0.5), [2])

    def test_union_of_modalities(self):
        dv = np.array([0.0, 0.9, 0.0, 0.0, 0.0])
        da = np.array([0.0, 0.0, 0.0, 0.9, 0.0])
        np.testing.assert_array_equal(boundaries(dv, da, 0.5), [2, 4])


class TestMakeSegments:
    def test_no_boundaries_single_segment(self):
        assert make_segments((), 5) == [(0, 5)]

    def test_single_boundary_by_hand(self):
        assert make_segments({3}, 6) == [(0, 3), (3, 6)]

    def test_maximal_fragmentation(self):
        assert make_segments(range(1, 6), 6) == [(t, t + 1) for t in range(6)]

    def test_exhaustive_partitions(self):
        for t in range(1, 9):
            for r in range(t):
                for subset in itertools.combinations(range(1, t), r):
                    segments = make_segments(subset, t)
                    covered = [c for s0, s1 in segments for c in range(s0, s1)]
                    assert covered == list(range(t))
                    assert all(s0 < s1 for s0, s1 in segments)

    def test_out_of_range_boundary(self):
        with pytest.raises(ValueError):
            make_segments({7}, 6)

    def test_fixed_segments_window(self):
        assert fixed_segments(7, 3) == [(0, 3), (3, 6), (6, 7)]


class TestSegmentSelection:
    def make_chunk(self, rows):
        rows = np.asarray(rows, dtype=np.float32)
        return VisualChunk(1, 1, rows.shape[0], rows)

    def test_single_chunk_matches_per_chunk_selection(self):
        rng = np.random.default_rng(0)
        chunk = self.make_chunk(rng.standard_normal((4, 3)))
        scores = SemanticScores(np.array([0.9, 0.1, 0.5, 0.3], dtype=np.float32))
        mask = segment_selection([chunk], [scores], 0.5, 0.0)
        np.testing.assert_array_equal(mask.semantic, [1, 3])

    def test_mean_scores_with_tie_rule(self):
        rng = np.random.default_rng(1)
        chunks = [self.make_chunk(rng.standard_normal((2, 3))) for _ in range(2)]
        scores = [
            SemanticScores(np.array([0.9, 0.1], dtype=np.float32)),
            SemanticScores(np.array([0.1, 0.9], dtype=np.float32)),
        ]
        mask = segment_selection(chunks, scores, 0.5, 0.0)
        np.testing.assert_array_equal(mask.semantic, [0])  # mean ties at 0.5, index 0 wins

    def test_identical_chunks_equal_any_single_mask(self):
        rng = np.random.default_rng(2)
        chunk = VisualChunk(1, 2, 2, rng.standard_normal((4, 3)).astype(np.float32))
        scores = SemanticScores(rng.uniform(-1, 1, 4).astype(np.float32))
        one = segment_selection([chunk], [scores], 0.5, 0.5)
        many = segment_selection([chunk] * 3, [scores] * 3, 0.5, 0.5)
        np.testing.assert_array_equal(one.union, many.union)

    def test_spatial_comes_from_first_chunk(self):
        flat = np.zeros((4, 2), dtype=np.float32)
        spiky = np.zeros((4, 2), dtype=np.float32)
        spiky[3] = 100.0
        scores = SemanticScores(np.zeros(4, dtype=np.float32))
        lead_spiky = segment_selection(
            [VisualChunk(1, 2, 2, spiky), VisualChunk(1, 2, 2, flat)], [scores] * 2, 0.0, 0.25
        )
        lead_flat = segment_selection(
            [VisualChunk(1, 2, 2, flat), VisualChunk(1, 2, 2, spiky)], [scores] * 2, 0.0, 0.25
        )
        np.testing.assert_array_equal(lead_spiky.spatial, [3])
        np.testing.assert_array_equal(lead_flat.spatial, [0])


def identical_chunks(n, m=4, d=3, seed=0):
    rng = np.random.default_rng(seed)
    rows = rng.standard_normal((m, d)).astype(np.float32)
    return [VisualChunk(1, 1, m, rows) for _ in range(n)]


class TestGreedyMerge:
    def test_chain_above_threshold_merges_all(self):
        chunks = identical_chunks(3)
        mask = SelectionMask.from_sets([0, 2], [], 4)
        groups, blocks = greedy_merge(chunks, np.array([0.999, 0.999]), 0.98, mask)
        assert groups == [(0, 3)]
        np.testing.assert_allclose(blocks[0], chunks[0].embeddings[[0, 2]], atol=1e-6)

    def test_all_below_threshold_keeps_singletons(self):
        chunks = identical_chunks(4)
        mask = SelectionMask.from_sets([1], [], 4)
        groups, _ = greedy_merge(chunks, np.array([0.1, 0.5, 0.9]), 0.98, mask)
        assert groups == [(0, 1), (1, 2), (2, 3), (3, 4)]

    def test_two_identical_chunks_average_to_either(self):
        chunks = identical_chunks(2, seed=5)
        mask = SelectionMask.from_sets([0, 1, 3], [], 4)
        groups, blocks = greedy_merge(chunks, np.array([1.0]), 0.98, mask)
        assert groups == [(0, 2)]
        np.testing.assert_allclose(blocks[0], chunks[0].embeddings[[0, 1, 3]], atol=1e-7)

    def test_unreachable_threshold_never_merges(self):
        chunks = identical_chunks(5)
        mask = SelectionMask.from_sets([0], [], 4)
        groups, _ = greedy_merge(chunks, np.ones(4), 1.5, mask)
        assert len(groups) == 5

    def test_threshold_below_minus_one_merges_everything(self):
        rng = np.random.default_rng(7)
        chunks = [
            VisualChunk(1, 1, 4, rng.standard_normal((4, 3)).astype(np.float32))
            for _ in range(4)
        ]
        mask = SelectionMask.from_sets([0, 2], [], 4)
        groups, _ = greedy_merge(chunks, rng.uniform(-1, 1, 3), -1.5, mask)
        assert groups == [(0, 4)]

    @given(st.integers(2, 6), st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_merged_block_is_arithmetic_mean(self, n, seed):
        rng = np.random.default_rng(seed)
        chunks = [
            VisualChunk(1, 1, 5, rng.standard_normal((5, 3)).astype(np.float32))
            for _ in range(n)
        ]
        mask = SelectionMask.from_sets(sorted(rng.choice(5, size=3, replace=False)), [], 5)
        groups, blocks = greedy_merge(chunks, np.ones(n - 1), 0.5, mask)
        assert groups == [(0, n)]
        expected = np.mean([c.embeddings[mask.union] for c in chunks], axis=0)
        np.testing.assert_allclose(blocks[0], expected, atol=1e-6)

    def test_keep_first_reduce(self):
        chunks = identical_chunks(3, seed=9)
        mask = SelectionMask.from_sets([0, 1], [], 4)
        _, blocks = greedy_merge(chunks, np.ones(2), 0.5, mask, reduce="first")
        np.testing.assert_array_equal(blocks[0], chunks[0].embeddings[[0, 1]])


class TestOnlineFilter:
    def test_identical_chunks_keep_only_last(self):
        rows = np.random.default_rng(0).standard_normal((4, 3)).astype(np.float32)
        stream = stream_from_visual_rows([rows] * 6, h=2, w=2)
        assert online_filter(stream, 0.99) == [5]

    def test_alternating_orthogonal_all_survive(self):
        a = np.array([[1.0, 0.0]], dtype=np.float32)
        b = np.array([[0.0, 1.0]], dtype=np.float32)
        stream = stream_from_visual_rows([a, b, a, b])
        assert online_filter(stream, 0.99) == [0, 1, 2, 3]

    def test_single_chunk_survives(self):
        stream = stream_from_visual_rows([np.ones((2, 3))], h=1, w=2)
        assert online_filter(stream, 0.99) == [0]

    @given(st.integers(1, 30), st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_survivor_count_formula(self, t, seed):
        rng = np.random.default_rng(seed)
        # mix of fresh and near-duplicate chunks
        rows_list = []
        for i in range(t):
            if i > 0 and rng.random() < 0.5:
                rows_list.append(rows_list[-1] + rng.normal(0, 1e-4, rows_list[-1].shape))
            else:
                rows_list.append(rng.standard_normal((3, 4)))
        stream = stream_from_visual_rows([r.astype(np.float32) for r in rows_list], h=1, w=3)
        survivors = online_filter(stream, 0.99)

        # independent trace: count comparisons that exceeded the threshold
        means = [np.mean(r, axis=0) for r in rows_list]
        evictions = 0
        prev = means[0]
        for i in range(1, t):
            if scalar_cosine(prev, means[i]) > 0.99:
                evictions += 1
            prev = means[i]
        assert len(survivors) == t - evictions

    def test_no_lookahead(self):
        # a later duplicate pair must not affect earlier decisions
        a = np.array([[1.0, 0.0]], dtype=np.float32)
        b = np.array([[0.0, 1.0]], dtype=np.float32)
        short = stream_from_visual_rows([a, b])
        longer = stream_from_visual_rows([a, b, b])
        assert online_filter(short, 0.99)[0] == online_filter(longer, 0.99)[0]
