"""Synthetic streams with planted ground truth, plus evaluation utilities.

The generator builds streams with a controlled three-tier similarity
structure per chunk: "aligned" tokens close to the chunk's planted semantic
direction (cosine >= 0.9), "background" tokens at intermediate similarity,
and "marker" tokens orthogonal to it. Markers stand in for visual evidence
the audio cannot explain; a correct low-similarity selection rule must keep
them. Scene changes rotate the planted direction so adjacent-chunk
similarity dips where segmentation should cut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import AudioChunk, InterleavedStream, VisualChunk
from .pipeline import PipelineResult


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one synthetic stream.

    ``aligned_fraction`` of non-marker tokens hug the chunk's semantic
    direction; the rest sit in a mid-similarity background band.
    ``drift_angle`` wobbles the direction between consecutive same-scene
    chunks, except with probability ``repeat_prob`` the previous direction
    is kept nearly unchanged (yielding a mergeable near-duplicate pair).
    """

    seed: int = 0
    t: int = 8
    frames: int = 1
    height: int = 4
    width: int = 4
    dim: int = 32
    audio_tokens: int = 4
    audio_dim: int = 16
    aligned_fraction: float = 0.7
    marker_positions: tuple[int, ...] = ()
    scene_changes: tuple[int, ...] = ()
    noise_scale: float = 0.05
    rotation_degrees: float = 120.0
    repeat_prob: float = 0.0
    drift_angle: float = 0.15

    def __post_init__(self) -> None:
        object.__setattr__(self, "marker_positions", tuple(int(p) for p in self.marker_positions))
        object.__setattr__(self, "scene_changes", tuple(int(c) for c in self.scene_changes))
        m = self.frames * self.height * self.width
        if any(p < 0 or p >= m for p in self.marker_positions):
            raise ValueError(f"marker positions must be indices below M={m}")
        if len(set(self.marker_positions)) != len(self.marker_positions):
            raise ValueError("marker positions must be distinct")
        if any(c < 1 or c >= self.t for c in self.scene_changes):
            raise ValueError("scene changes must be chunk indices in [1, T)")
        if not 0.0 <= self.aligned_fraction <= 1.0:
            raise ValueError("aligned_fraction must be in [0, 1]")

    @property
    def token_count(self) -> int:
        return self.frames * self.height * self.width


@dataclass(frozen=True)
class GroundTruth:
    """What the generator planted: marker slots, scene cuts, true directions."""

    marker_positions: tuple[int, ...]  # token indices, planted in every chunk
    scene_changes: tuple[int, ...]
    semantic_directions: np.ndarray  # (T, d): per-chunk direction, the ideal pooled semantics
    audio_directions: np.ndarray  # (T, d_a)


@dataclass(frozen=True)
class RetrievalReport:
    recall_at_1: float
    recall_at_5: float
    median_rank: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.recall_at_1 <= self.recall_at_5 <= 1.0:
            raise ValueError("recalls must satisfy 0 <= R@1 <= R@5 <= 1")
        if self.median_rank < 1:
            raise ValueError("median rank must be >= 1")


def _unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _orthogonal_unit(rng: np.random.Generator, direction: np.ndarray) -> np.ndarray:
    """Random unit vector exactly orthogonal to ``direction`` (two GS passes)."""
    for _ in range(8):
        u = rng.standard_normal(direction.shape[0])
        u -= (u @ direction) * direction
        u -= (u @ direction) * direction
        norm = np.linalg.norm(u)
        if norm > 1e-6:
            return u / norm
    raise ValueError("could not build an orthogonal direction (dim too small?)")


def _rotate(rng: np.random.Generator, direction: np.ndarray, angle: float) -> np.ndarray:
    """A copy of ``direction`` rotated by exactly ``angle`` toward a random
    orthogonal direction (so the cosine to the original is cos(angle))."""
    if angle == 0.0:
        return direction
    ortho = _orthogonal_unit(rng, direction)
    return math.cos(angle) * direction + math.sin(angle) * ortho


def gen_synthetic(spec: SynthSpec) -> tuple[InterleavedStream, GroundTruth]:
    """Deterministic synthetic stream plus the planted ground truth."""
    if spec.dim < 3 or spec.audio_dim < 3:
        raise ValueError("need dim >= 3 to plant orthogonal structure")
    rng = np.random.default_rng(spec.seed)
    m = spec.token_count
    markers = np.asarray(spec.marker_positions, dtype=np.int64)
    theta_aligned = min(math.acos(0.905), spec.noise_scale * math.pi)
    scene_changes = set(spec.scene_changes)

    v_dir = _unit(rng, spec.dim)
    a_dir = _unit(rng, spec.audio_dim)
    v_dirs = np.empty((spec.t, spec.dim), dtype=np.float64)
    a_dirs = np.empty((spec.t, spec.audio_dim), dtype=np.float64)
    chunks = []
    marker_set = set(spec.marker_positions)
    non_marker = [j for j in range(m) if j not in marker_set]
    n_aligned = min(len(non_marker), round(spec.aligned_fraction * m))
    for t in range(spec.t):
        if t in scene_changes:
            rotation = math.radians(spec.rotation_degrees)
            v_dir = _rotate(rng, v_dir, rotation)
            a_dir = _rotate(rng, a_dir, rotation)
        elif t > 0:
            # repeats wobble negligibly (mergeable pair); fresh chunks drift by
            # 0.6..1.0 of drift_angle so the pair's fate is not left to chance
            if rng.random() < spec.repeat_prob:
                drift = 0.002 * rng.random()
            else:
                drift = spec.drift_angle * rng.uniform(0.6, 1.0)
            v_dir = _rotate(rng, v_dir, drift)
        v_dirs[t] = v_dir
        a_dirs[t] = a_dir

        rows = np.empty((m, spec.dim), dtype=np.float64)
        for rank, j in enumerate(non_marker):
            if rank < n_aligned:
                angle = theta_aligned * rng.random()
            else:
                # background band: similarity strictly between markers and aligned
                angle = math.acos(rng.uniform(0.15, 0.85))
            rows[j] = _rotate(rng, v_dirs[t], angle)
        for j in markers:
            rows[j] = _orthogonal_unit(rng, v_dirs[t])

        audio = np.stack(
            [
                _rotate(rng, a_dirs[t], theta_aligned * rng.random())
                for _ in range(spec.audio_tokens)
            ]
        )
        chunks.append(
            (
                VisualChunk(spec.frames, spec.height, spec.width, rows.astype(np.float32)),
                AudioChunk(audio.astype(np.float32)),
            )
        )

    truth = GroundTruth(
        marker_positions=spec.marker_positions,
        scene_changes=spec.scene_changes,
        semantic_directions=v_dirs.astype(np.float32),
        audio_directions=a_dirs.astype(np.float32),
    )
    return InterleavedStream(tuple(chunks)), truth


def default_benchmark_spec(seed: int = 2024) -> SynthSpec:
    """The desk-scale benchmark: 32 chunks of 2 x 14 x 14 tokens with a
    realistic mix of audio-explainable, background, and marker content."""
    return SynthSpec(
        seed=seed,
        t=32,
        frames=2,
        height=14,
        width=14,
        dim=64,
        audio_tokens=8,
        audio_dim=32,
        aligned_fraction=0.6,
        marker_positions=tuple(range(0, 392, 33)),
        scene_changes=(7, 14, 22, 27),
        noise_scale=0.05,
        rotation_degrees=120.0,
        repeat_prob=0.30,
        drift_angle=0.5,
    )


def marker_retention(result: PipelineResult, markers) -> float:
    """Fraction of planted marker slots that survive in their chunk's mask."""
    positions = getattr(markers, "marker_positions", markers)
    positions = np.asarray(list(positions), dtype=np.int64)
    if positions.size == 0:
        return 1.0
    kept = 0
    total = 0
    for mask in result.per_chunk_masks:
        total += positions.size
        kept += int(np.isin(positions, mask.union).sum())
    return kept / total


def retrieval_eval(audio_side: np.ndarray, video_side: np.ndarray) -> RetrievalReport:
    """Rank each query's true candidate under descending cosine similarity.

    Ties break toward the smaller candidate index. The median rank uses the
    midpoint convention for even counts.
    """
    a = np.asarray(audio_side, dtype=np.float64)
    v = np.asarray(video_side, dtype=np.float64)
    if a.ndim != 2 or a.shape != v.shape:
        raise ValueError(f"expected matching (N, d) matrices, got {a.shape} and {v.shape}")
    n = a.shape[0]
    an = np.sqrt(np.einsum("ij,ij->i", a, a))
    vn = np.sqrt(np.einsum("ij,ij->i", v, v))
    an[an == 0.0] = 1.0
    vn[vn == 0.0] = 1.0
    sims = (a @ v.T) / np.outer(an, vn)

    true_scores = sims.diagonal()
    better = (sims > true_scores[:, None]).sum(axis=1)
    tied_before = np.array(
        [int(np.sum(sims[i, :i] == true_scores[i])) for i in range(n)]
    )
    ranks = 1 + better + tied_before
    return RetrievalReport(
        recall_at_1=float(np.mean(ranks <= 1)),
        recall_at_5=float(np.mean(ranks <= 5)),
        median_rank=float(_midpoint_median(ranks)),
    )


def _midpoint_median(ranks: np.ndarray) -> float:
    ordered = np.sort(ranks)
    n = ordered.shape[0]
    if n % 2 == 1:
        return float(ordered[n // 2])
    return float(ordered[n // 2 - 1] + ordered[n // 2]) / 2.0


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL(p || q) for probability vectors, with 0 * log(0 / .) = 0."""
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if p.shape != q.shape:
        raise ValueError("p and q must share length")
    if abs(p.sum() - 1.0) > 1e-6 or abs(q.sum() - 1.0) > 1e-6:
        raise ValueError("p and q must each sum to 1 within 1e-6")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("probabilities must be nonnegative")
    support = p > 0
    if np.any(support & (q == 0)):
        raise ValueError("support violation: q is zero where p is positive")
    return float(np.sum(p[support] * np.log(p[support] / q[support])))
