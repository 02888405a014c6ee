"""Temporal stage: depth-score segmentation, shared selection, greedy merging.

Adjacent-chunk similarities are computed on full chunk means (per modality).
Valleys in those similarities, detected by the depth score, open segment
boundaries; every chunk of a segment shares one retention mask, which makes
averaging consecutive near-duplicate chunks layout-stable.

Indexing convention: similarity vectors have length T - 1 and entry i
describes the (chunk i, chunk i + 1) pair. A flagged valley at pair i
splits between chunk i and chunk i + 1, so the boundary opens a new
segment at chunk i + 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    InterleavedStream,
    SelectionMask,
    VisualChunk,
    ZeroNormWarning,
    mean_pool,
)
from .selection import SemanticScores, select_semantic, select_spatial, union_selection


@dataclass(frozen=True)
class AdjacentSimilarities:
    """Cosine between consecutive chunk means, per modality (length T - 1)."""

    visual: np.ndarray
    audio: np.ndarray

    def __post_init__(self) -> None:
        vis = np.ascontiguousarray(self.visual, dtype=np.float32).reshape(-1)
        aud = np.ascontiguousarray(self.audio, dtype=np.float32).reshape(-1)
        if vis.shape != aud.shape:
            raise ValueError("visual and audio similarity vectors must share length")
        vis.setflags(write=False)
        aud.setflags(write=False)
        object.__setattr__(self, "visual", vis)
        object.__setattr__(self, "audio", aud)


@dataclass(frozen=True)
class SegmentPlan:
    """Segments, their shared masks, and per-segment merge groups.

    ``segments`` are half-open (start, end) chunk ranges partitioning
    0..T-1 in order; each segment's ``merge_groups`` are half-open ranges
    partitioning that segment.
    """

    segments: tuple[tuple[int, int], ...]
    shared_masks: tuple[SelectionMask, ...]
    merge_groups: tuple[tuple[tuple[int, int], ...], ...]


def _chunk_means(stream: InterleavedStream) -> tuple[np.ndarray, np.ndarray]:
    visual = np.stack([mean_pool(stream.visual(t).embeddings) for t in range(len(stream))])
    audio = np.stack([mean_pool(stream.audio(t).embeddings) for t in range(len(stream))])
    return visual, audio


def _consecutive_cosines(means: np.ndarray) -> tuple[np.ndarray, int]:
    m = means.astype(np.float64)
    norms = np.sqrt(np.einsum("ij,ij->i", m, m))
    zero = norms == 0.0
    safe = np.where(zero, 1.0, norms)
    dots = np.einsum("ij,ij->i", m[:-1], m[1:])
    sims = dots / (safe[:-1] * safe[1:])
    degenerate = zero[:-1] | zero[1:]
    sims[degenerate] = 0.0
    np.clip(sims, -1.0, 1.0, out=sims)
    return sims.astype(np.float32), int(degenerate.sum())


def adjacent_similarities_counted(
    stream: InterleavedStream,
) -> tuple[AdjacentSimilarities, int]:
    """Adjacent-pair similarities plus the degenerate-evaluation count."""
    visual_means, audio_means = _chunk_means(stream)
    if len(stream) == 1:
        empty = np.empty(0, dtype=np.float32)
        return AdjacentSimilarities(empty, empty), 0
    vis, nv = _consecutive_cosines(visual_means)
    aud, na = _consecutive_cosines(audio_means)
    return AdjacentSimilarities(vis, aud), nv + na


def adjacent_similarities(stream: InterleavedStream) -> AdjacentSimilarities:
    """Per-modality cosine between each chunk mean and its predecessor's."""
    sims, zeros = adjacent_similarities_counted(stream)
    if zeros:
        warnings.warn(
            f"{zeros} zero-norm chunk means scored 0 in adjacent similarities",
            ZeroNormWarning,
            stacklevel=2,
        )
    return sims


def depth_scores(sims: np.ndarray, t: int) -> np.ndarray:
    """Valley depth at each similarity position: how far the local similarity
    dips below the best values on both sides.

    Positions missing a strictly-earlier or strictly-later similarity (the
    first and last pair, and everything when T <= 3) score exactly 0.
    """
    s = np.asarray(sims, dtype=np.float64).reshape(-1)
    if s.shape[0] != t - 1:
        raise ValueError(f"expected {t - 1} similarities for T={t}, got {s.shape[0]}")
    n = s.shape[0]
    depth = np.zeros(n, dtype=np.float64)
    if n >= 3:
        left_max = np.maximum.accumulate(s)[:-2]  # max over strictly-earlier entries
        right_max = np.maximum.accumulate(s[::-1])[::-1][2:]  # strictly-later
        interior = slice(1, n - 1)
        depth[interior] = left_max + right_max - 2.0 * s[interior]
    return depth


def boundaries(dv: np.ndarray, da: np.ndarray, threshold: float) -> np.ndarray:
    """Segment-start chunk indices where either modality's depth exceeds the threshold."""
    dv = np.asarray(dv).reshape(-1)
    da = np.asarray(da).reshape(-1)
    if dv.shape != da.shape:
        raise ValueError("depth vectors must share length")
    flagged = np.nonzero((dv > threshold) | (da > threshold))[0]
    return flagged + 1  # pair i separates chunk i from chunk i + 1


def make_segments(boundary_set, t: int) -> list[tuple[int, int]]:
    """Split 0..T-1 into maximal boundary-free runs; each boundary starts a segment."""
    starts = sorted({int(b) for b in boundary_set})
    if starts and (starts[0] < 0 or starts[-1] >= t):
        raise ValueError(f"boundary out of range for T={t}: {starts}")
    cuts = [0] + [b for b in starts if b > 0] + [t]
    return [(cuts[i], cuts[i + 1]) for i in range(len(cuts) - 1)]


def fixed_segments(t: int, window: int = 3) -> list[tuple[int, int]]:
    """Ablation baseline: group every `window` consecutive chunks."""
    if window < 1:
        raise ValueError("window must be positive")
    return [(s, min(s + window, t)) for s in range(0, t, window)]


def segment_selection(
    chunks: Sequence[VisualChunk],
    scores: Sequence[SemanticScores],
    rho_sem: float,
    rho_spa: float,
) -> SelectionMask:
    """Shared mask for a segment: semantic selection on the segment-mean
    scores, spatial selection reused from the segment's first chunk."""
    if len(chunks) != len(scores) or not chunks:
        raise ValueError("need one score vector per chunk in the segment")
    m = chunks[0].token_count
    stacked = np.stack([s.values for s in scores])
    mean_scores = SemanticScores(stacked.mean(axis=0, dtype=np.float64).astype(np.float32))
    semantic = select_semantic(mean_scores, rho_sem)
    spatial = select_spatial(chunks[0], rho_spa)
    return union_selection(semantic, spatial, m)


def greedy_merge(
    chunks: Sequence[VisualChunk],
    pair_sims: np.ndarray,
    tau_merge: float,
    mask: SelectionMask,
    reduce: str = "mean",
) -> tuple[list[tuple[int, int]], list[np.ndarray]]:
    """Single greedy pass over a segment's consecutive chunks.

    The current group extends while each successive pair's visual similarity
    exceeds ``tau_merge``; a pair at or below it starts a new group. Each
    group's block holds, per retained index, the mean of the group's rows
    (``reduce="mean"``) or the first chunk's rows unchanged
    (``reduce="first"``, the whole-chunk-pruning ablation).

    Returns (groups, blocks): half-open ranges local to ``chunks`` and one
    (|mask.union|, d) float32 block per group.
    """
    sims = np.asarray(pair_sims).reshape(-1)
    if sims.shape[0] != len(chunks) - 1:
        raise ValueError("need one similarity per consecutive chunk pair")
    if reduce not in ("mean", "first"):
        raise ValueError(f"unknown reduce strategy {reduce!r}")

    groups: list[tuple[int, int]] = []
    start = 0
    for i in range(len(chunks) - 1):
        if not sims[i] > tau_merge:
            groups.append((start, i + 1))
            start = i + 1
    groups.append((start, len(chunks)))

    idx = mask.union
    blocks = []
    for g0, g1 in groups:
        if reduce == "first" or g1 - g0 == 1:
            blocks.append(np.ascontiguousarray(chunks[g0].embeddings[idx]))
        else:
            stacked = np.stack([chunks[c].embeddings[idx] for c in range(g0, g1)])
            blocks.append(stacked.mean(axis=0, dtype=np.float64).astype(np.float32))
    return groups, blocks


def online_filter(stream: InterleavedStream, online_threshold: float) -> list[int]:
    """Causal chunk filter: a new chunk evicts the latest survivor when their
    visual-mean similarity exceeds the threshold. No lookahead."""
    visual_means, _ = _chunk_means(stream)
    survivors = [0]
    prev = visual_means[0]
    for t in range(1, len(stream)):
        current = visual_means[t]
        sim, _ = _consecutive_cosines(np.stack([prev, current]))
        if sim[0] > online_threshold:
            survivors[-1] = t
        else:
            survivors.append(t)
        prev = current
    return survivors
