"""End-to-end compression: predictor scoring, selection, temporal merging.

Offline mode scores every chunk against its audio-predicted semantics,
segments the stream at similarity valleys, applies one shared mask per
segment, and averages consecutive near-duplicate chunks. Online mode
replaces segmentation with the causal chunk filter and applies per-chunk
selection to survivors. Audio chunks pass through untouched in both modes,
in their original interleaved positions.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    AudioEntry,
    CompressedStream,
    InterleavedStream,
    Mode,
    PipelineConfig,
    SelectionMask,
    Stats,
    VisualBlock,
)
from .predictor import PredictorWeights, predict_semantics
from .selection import (
    SemanticScores,
    scored_with_count,
    select_semantic,
    select_spatial,
    union_selection,
)
from . import temporal


@dataclass(frozen=True)
class PipelineResult:
    """Compressed stream, accounting, and the plan that produced it.

    ``per_chunk_masks`` always has one entry per input chunk: the shared
    segment mask in offline mode, the chunk's own mask for online
    survivors, and an empty mask for chunks the online filter dropped.
    Exactly one of ``segment_plan`` (offline) / ``survivors`` (online) is set.
    """

    compressed: CompressedStream
    stats: Stats
    per_chunk_masks: tuple[SelectionMask, ...]
    segment_plan: temporal.SegmentPlan | None = None
    survivors: tuple[int, ...] | None = None


def _score_chunks(
    stream: InterleavedStream,
    weights: PredictorWeights | None,
    pooled_override: np.ndarray | None,
    workers: int,
) -> tuple[list[SemanticScores], int]:
    """Per-chunk semantic scores; chunks are independent, so thread-parallel."""
    if pooled_override is None and weights is None:
        raise ValueError("need predictor weights or a pooled-semantics override")
    if pooled_override is not None and len(pooled_override) != len(stream):
        raise ValueError("pooled override must provide one vector per chunk")

    def one(t: int) -> tuple[SemanticScores, int]:
        if pooled_override is not None:
            pooled = np.asarray(pooled_override[t], dtype=np.float32)
        else:
            pooled = predict_semantics(stream.audio(t), weights)
        return scored_with_count(stream.visual(t), pooled)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scored = list(pool.map(one, range(len(stream))))
    else:
        scored = [one(t) for t in range(len(stream))]
    scores = [s for s, _ in scored]
    zero_norms = sum(z for _, z in scored)
    return scores, zero_norms


def compress(
    stream: InterleavedStream,
    weights: PredictorWeights | None,
    cfg: PipelineConfig,
    *,
    pooled_override: np.ndarray | None = None,
    segmentation: str = "depth",
    merge_reduce: str = "mean",
    workers: int = 1,
) -> PipelineResult:
    """Compress an interleaved stream under the given configuration.

    ``pooled_override`` substitutes an external (T, d) matrix for the
    predictor's pooled semantics, used by test fixtures with planted ground
    truth. ``segmentation="fixed"`` and ``merge_reduce="first"`` expose the
    ablation baselines (3-chunk windows / keep first chunk per group); the
    supported mode is depth segmentation with mean merging.
    """
    t_count = len(stream)
    f, h, w, d, l_audio, _ = stream.token_geometry
    m = f * h * w
    if segmentation not in ("depth", "fixed"):
        raise ValueError(f"unknown segmentation {segmentation!r}")

    scores, zero_norms = _score_chunks(stream, weights, pooled_override, workers)

    if cfg.mode is Mode.ONLINE:
        return _compress_online(stream, scores, cfg, zero_norms)

    sims, sim_zeros = temporal.adjacent_similarities_counted(stream)
    zero_norms += sim_zeros
    if segmentation == "fixed":
        segments = temporal.fixed_segments(t_count)
    else:
        dv = temporal.depth_scores(sims.visual, t_count)
        da = temporal.depth_scores(sims.audio, t_count)
        starts = temporal.boundaries(dv, da, cfg.depth_threshold)
        segments = temporal.make_segments(starts, t_count)

    entries: list[object] = []
    shared_masks: list[SelectionMask] = []
    all_groups: list[tuple[tuple[int, int], ...]] = []
    per_chunk_masks: list[SelectionMask] = []
    retained = 0
    merges = 0
    for s0, s1 in segments:
        seg_chunks = [stream.visual(t) for t in range(s0, s1)]
        mask = temporal.segment_selection(
            seg_chunks, scores[s0:s1], cfg.rho_sem, cfg.rho_spa
        )
        # pair (t, t+1) of the full stream sits at sims index t
        groups, blocks = temporal.greedy_merge(
            seg_chunks, sims.visual[s0 : s1 - 1], cfg.tau_merge, mask, reduce=merge_reduce
        )
        shared_masks.append(mask)
        all_groups.append(tuple((s0 + g0, s0 + g1) for g0, g1 in groups))
        per_chunk_masks.extend([mask] * (s1 - s0))
        block_by_first = {
            s0 + g0: VisualBlock(tuple(range(s0 + g0, s0 + g1)), mask.union, block)
            for (g0, g1), block in zip(groups, blocks)
        }
        for t in range(s0, s1):
            if t in block_by_first:
                entries.append(block_by_first[t])
                retained += block_by_first[t].embeddings.shape[0]
            entries.append(AudioEntry(t, stream.audio(t)))
        merges += (s1 - s0) - len(groups)

    stats = Stats(
        original_video_tokens=t_count * m,
        retained_video_tokens=retained,
        original_audio_tokens=t_count * l_audio,
        segments=len(segments),
        merges=merges,
        zero_norm_warnings=zero_norms,
    )
    plan = temporal.SegmentPlan(tuple(segments), tuple(shared_masks), tuple(all_groups))
    return PipelineResult(
        compressed=CompressedStream(tuple(entries)),
        stats=stats,
        per_chunk_masks=tuple(per_chunk_masks),
        segment_plan=plan,
    )


def _compress_online(
    stream: InterleavedStream,
    scores: list[SemanticScores],
    cfg: PipelineConfig,
    zero_norms: int,
) -> PipelineResult:
    t_count = len(stream)
    f, h, w, _, l_audio, _ = stream.token_geometry
    m = f * h * w
    survivors = temporal.online_filter(stream, cfg.online_threshold)
    surviving = set(survivors)

    entries: list[object] = []
    per_chunk_masks: list[SelectionMask] = []
    retained = 0
    for t in range(t_count):
        if t in surviving:
            chunk = stream.visual(t)
            mask = union_selection(
                select_semantic(scores[t], cfg.rho_sem),
                select_spatial(chunk, cfg.rho_spa),
                m,
            )
            entries.append(VisualBlock((t,), mask.union, chunk.embeddings[mask.union]))
            retained += mask.union.shape[0]
        else:
            mask = SelectionMask.empty(m)
        per_chunk_masks.append(mask)
        entries.append(AudioEntry(t, stream.audio(t)))

    stats = Stats(
        original_video_tokens=t_count * m,
        retained_video_tokens=retained,
        original_audio_tokens=t_count * l_audio,
        segments=len(survivors),  # each survivor stands alone; nothing is merged
        merges=0,
        zero_norm_warnings=zero_norms,
    )
    return PipelineResult(
        compressed=CompressedStream(tuple(entries)),
        stats=stats,
        per_chunk_masks=tuple(per_chunk_masks),
        survivors=tuple(survivors),
    )


def compression_ratio(stats: Stats) -> dict[str, float]:
    """Video-only and audio-inclusive compression fractions."""
    if stats.original_video_tokens <= 0:
        raise ValueError("original video token count must be positive")
    return {"video": stats.video_compression, "total": stats.total_compression}
