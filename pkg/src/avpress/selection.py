"""Per-chunk token retention: semantic pruning, spatial coverage, union.

The semantic branch keeps the tokens *least* similar to the audio-predicted
chunk semantics (what audio already conveys is redundant). The spatial
branch keeps one high-variation token per grid cell of the frame-averaged
map so localized detail survives even in audio-explainable regions. The
final mask is their union.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import SelectionMask, VisualChunk, ZeroNormWarning, row_cosines


@dataclass(frozen=True)
class SemanticScores:
    """Per-token cosine similarity to the chunk's predicted semantics."""

    values: np.ndarray  # (M,) float32 in [-1, 1]

    def __post_init__(self) -> None:
        vals = np.ascontiguousarray(self.values, dtype=np.float32).reshape(-1)
        if not np.all(np.isfinite(vals)):
            raise ValueError("semantic scores must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class SpatialVariationMap:
    """Per-position sum of L2 distances to existing grid neighbors."""

    values: np.ndarray  # (H, W) float32, nonnegative

    def __post_init__(self) -> None:
        vals = np.ascontiguousarray(self.values, dtype=np.float32)
        if vals.ndim != 2 or not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("variation map must be a finite nonnegative H x W grid")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def _floor_fraction(fraction: float, count: int) -> int:
    # tiny epsilon bridges float error like 0.29 * 100 = 28.999...996
    return int(math.floor(fraction * count + 1e-9))


def semantic_scores(chunk: VisualChunk, pooled: np.ndarray) -> SemanticScores:
    """Score every visual token by cosine to the pooled predicted semantics."""
    scores, zeros = scored_with_count(chunk, pooled)
    if zeros:
        warnings.warn(
            f"{zeros} zero-norm vectors scored 0 in semantic scoring",
            ZeroNormWarning,
            stacklevel=2,
        )
    return scores


def scored_with_count(chunk: VisualChunk, pooled: np.ndarray) -> tuple[SemanticScores, int]:
    """semantic_scores plus the degenerate-evaluation count, for accounting."""
    values, zeros = row_cosines(chunk.embeddings, pooled)
    return SemanticScores(values), zeros


def select_semantic(scores: SemanticScores, rho_sem: float) -> np.ndarray:
    """Indices of the floor(rho_sem * M) lowest-scoring tokens, sorted.

    Ties break toward the smaller index so the result is independent of the
    sort implementation.
    """
    if not 0.0 <= rho_sem <= 1.0:
        raise ValueError(f"rho_sem must be in [0, 1], got {rho_sem}")
    m = scores.values.shape[0]
    k = _floor_fraction(rho_sem, m)
    if k == 0:
        return np.empty(0, dtype=np.int64)
    order = np.argsort(scores.values, kind="stable")  # stable: ties keep index order
    return np.sort(order[:k]).astype(np.int64)


def frame_average(chunk: VisualChunk) -> np.ndarray:
    """Mean over frames: (F, H, W, d) token rows to one (H, W, d) map."""
    f, h, w = chunk.frames, chunk.height, chunk.width
    grid = chunk.embeddings.reshape(f, h, w, chunk.dim)
    return grid.mean(axis=0, dtype=np.float64).astype(np.float32)


def spatial_variation(grid: np.ndarray) -> SpatialVariationMap:
    """Sum of L2-norm differences to the up-to-4 horizontal/vertical neighbors."""
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 3:
        raise ValueError(f"expected an (H, W, d) map, got shape {g.shape}")
    h, w, _ = g.shape
    down = np.sqrt(((g[1:, :] - g[:-1, :]) ** 2).sum(axis=-1))  # (H-1, W)
    right = np.sqrt(((g[:, 1:] - g[:, :-1]) ** 2).sum(axis=-1))  # (H, W-1)
    scores = np.zeros((h, w), dtype=np.float64)
    scores[:-1, :] += down
    scores[1:, :] += down
    scores[:, :-1] += right
    scores[:, 1:] += right
    return SpatialVariationMap(scores.astype(np.float32))


def _grid_cells(h: int, w: int, g: int) -> list[tuple[int, int, int, int]]:
    """Tile the map with g-derived strides; trailing cells clip to the edge."""
    dh = max(1, h // g)
    dw = max(1, w // g)
    cells = []
    for r0 in range(0, h, dh):
        for c0 in range(0, w, dw):
            cells.append((r0, min(r0 + dh, h), c0, min(c0 + dw, w)))
    return cells


def select_spatial(chunk: VisualChunk, rho_spa: float) -> np.ndarray:
    """Grid-wise sampling: one max-variation position per cell, all frames.

    The spatial budget N_spa = max(1, floor(rho_spa * H * W)) sets the grid
    resolution g = floor(sqrt(N_spa)); the realized cell count can differ
    slightly from N_spa when H or W is not divisible by g. Chosen (row, col)
    positions are replicated across every frame of the chunk.
    """
    if not 0.0 <= rho_spa <= 1.0:
        raise ValueError(f"rho_spa must be in [0, 1], got {rho_spa}")
    if rho_spa == 0.0:
        return np.empty(0, dtype=np.int64)
    h, w = chunk.height, chunk.width
    n_spa = max(1, _floor_fraction(rho_spa, h * w))
    g = int(math.isqrt(n_spa))

    variation = spatial_variation(frame_average(chunk)).values
    positions = []
    for r0, r1, c0, c1 in _grid_cells(h, w, g):
        cell = variation[r0:r1, c0:c1]
        flat = int(np.argmax(cell))  # argmax returns the first max: smallest row-major index
        positions.append((r0 + flat // (c1 - c0)) * w + c0 + flat % (c1 - c0))

    per_frame = np.sort(np.asarray(positions, dtype=np.int64))
    offsets = np.arange(chunk.frames, dtype=np.int64) * (h * w)
    return (offsets[:, None] + per_frame[None, :]).reshape(-1)


def union_selection(semantic: np.ndarray, spatial: np.ndarray, token_count: int) -> SelectionMask:
    """Combine both branches into the final per-chunk retention mask."""
    return SelectionMask.from_sets(semantic, spatial, token_count)
