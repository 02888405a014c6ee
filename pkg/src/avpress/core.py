"""Shared domain types and elementary vector utilities.

Token embeddings are stored as float32 row matrices; all similarity math
accumulates dot products and norms in float64 before rounding back, so long
reductions stay stable at the precision of the stored embeddings.

Visual token rows are ordered row-major over (frame, row, col): token j of a
chunk with grid (F, H, W) sits at frame j // (H*W), row (j % (H*W)) // W,
col j % W. All index arithmetic in the selection stage relies on this order,
and the binary stream format encodes it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class ZeroNormWarning(UserWarning):
    """A zero-norm vector entered a cosine similarity (result defined as 0)."""


class StreamValidationError(ValueError):
    """An interleaved stream violates a structural invariant."""


class Mode(str, Enum):
    OFFLINE = "offline"
    ONLINE = "online"


@dataclass(frozen=True)
class PipelineConfig:
    """Hyperparameters for the compression pipeline.

    Defaults are the fixed operating point used throughout: retain the
    bottom half of tokens by audio-predicted similarity, add a 10% spatial
    coverage budget, and merge consecutive chunks above 0.98 visual
    similarity.
    """

    rho_sem: float = 0.5
    rho_spa: float = 0.1
    tau_merge: float = 0.98
    depth_threshold: float = 0.5
    online_threshold: float = 0.99
    mode: Mode = Mode.OFFLINE

    def __post_init__(self) -> None:
        if not 0.0 <= self.rho_sem <= 1.0:
            raise ValueError(f"rho_sem must be in [0, 1], got {self.rho_sem}")
        if not 0.0 <= self.rho_spa <= 1.0:
            raise ValueError(f"rho_spa must be in [0, 1], got {self.rho_spa}")
        for name in ("tau_merge", "depth_threshold", "online_threshold"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        if not isinstance(self.mode, Mode):
            object.__setattr__(self, "mode", Mode(self.mode))


def _as_float32_matrix(values: np.ndarray, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float32)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class VisualChunk:
    """One chunk of visual tokens: F frames on an H x W grid, d-dim rows."""

    frames: int
    height: int
    width: int
    embeddings: np.ndarray  # (F*H*W, d) float32, row-major over (frame, row, col)

    def __post_init__(self) -> None:
        if min(self.frames, self.height, self.width) < 1:
            raise ValueError(
                f"grid dims must be positive, got F={self.frames} H={self.height} W={self.width}"
            )
        emb = _as_float32_matrix(self.embeddings, "visual embeddings")
        object.__setattr__(self, "embeddings", emb)
        expected = self.frames * self.height * self.width
        if emb.shape[0] != expected:
            raise ValueError(
                f"visual chunk has {emb.shape[0]} rows, expected F*H*W = {expected}"
            )

    @property
    def token_count(self) -> int:
        return self.embeddings.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]


@dataclass(frozen=True)
class AudioChunk:
    """One chunk of audio tokens (L rows, d_a columns)."""

    embeddings: np.ndarray

    def __post_init__(self) -> None:
        emb = _as_float32_matrix(self.embeddings, "audio embeddings")
        if emb.shape[0] < 1:
            raise ValueError("audio chunk must contain at least one token")
        object.__setattr__(self, "embeddings", emb)

    @property
    def token_count(self) -> int:
        return self.embeddings.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]


@dataclass(frozen=True)
class InterleavedStream:
    """Ordered sequence of (visual, audio) chunk pairs sharing one geometry."""

    chunks: tuple[tuple[VisualChunk, AudioChunk], ...]

    def __post_init__(self) -> None:
        chunks = tuple(self.chunks)
        object.__setattr__(self, "chunks", chunks)
        if len(chunks) < 1:
            raise StreamValidationError("stream must contain at least one chunk")
        v0, a0 = chunks[0]
        for t, (v, a) in enumerate(chunks):
            if (v.frames, v.height, v.width) != (v0.frames, v0.height, v0.width):
                raise StreamValidationError(
                    f"chunk {t}: visual grid {(v.frames, v.height, v.width)} differs "
                    f"from chunk 0 grid {(v0.frames, v0.height, v0.width)}"
                )
            if v.dim != v0.dim:
                raise StreamValidationError(
                    f"chunk {t}: visual dim {v.dim} differs from chunk 0 dim {v0.dim}"
                )
            if a.embeddings.shape != a0.embeddings.shape:
                raise StreamValidationError(
                    f"chunk {t}: audio shape {a.embeddings.shape} differs "
                    f"from chunk 0 shape {a0.embeddings.shape}"
                )

    def __len__(self) -> int:
        return len(self.chunks)

    @property
    def token_geometry(self) -> tuple[int, int, int, int, int, int]:
        """(F, H, W, d, L, d_a) shared by every chunk."""
        v, a = self.chunks[0]
        return v.frames, v.height, v.width, v.dim, a.token_count, a.dim

    def visual(self, t: int) -> VisualChunk:
        return self.chunks[t][0]

    def audio(self, t: int) -> AudioChunk:
        return self.chunks[t][1]


def _sorted_index_array(indices, limit: int, name: str) -> np.ndarray:
    arr = np.unique(np.asarray(indices, dtype=np.int64)).astype(np.int64)
    if arr.size and (arr[0] < 0 or arr[-1] >= limit):
        bad = arr[0] if arr[0] < 0 else arr[-1]
        raise ValueError(f"{name} index {bad} out of range for {limit} tokens")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SelectionMask:
    """Retained token indices for one chunk: semantic, spatial, and their union."""

    semantic: np.ndarray
    spatial: np.ndarray
    union: np.ndarray
    token_count: int

    def __post_init__(self) -> None:
        sem = _sorted_index_array(self.semantic, self.token_count, "semantic")
        spa = _sorted_index_array(self.spatial, self.token_count, "spatial")
        uni = _sorted_index_array(self.union, self.token_count, "union")
        if not np.array_equal(uni, np.union1d(sem, spa)):
            raise ValueError("union must equal semantic | spatial")
        object.__setattr__(self, "semantic", sem)
        object.__setattr__(self, "spatial", spa)
        object.__setattr__(self, "union", uni)

    @classmethod
    def from_sets(cls, semantic, spatial, token_count: int) -> "SelectionMask":
        sem = _sorted_index_array(semantic, token_count, "semantic")
        spa = _sorted_index_array(spatial, token_count, "spatial")
        return cls(sem, spa, np.union1d(sem, spa), token_count)

    @classmethod
    def empty(cls, token_count: int) -> "SelectionMask":
        return cls.from_sets((), (), token_count)


@dataclass(frozen=True)
class AudioEntry:
    """An audio chunk carried through unchanged."""

    chunk_index: int
    audio: AudioChunk


@dataclass(frozen=True)
class VisualBlock:
    """Retained visual rows for one merge group (or one surviving chunk).

    ``embeddings[i]`` is the (possibly averaged) row at original token index
    ``token_indices[i]`` of every chunk in ``chunk_indices``.
    """

    chunk_indices: tuple[int, ...]
    token_indices: np.ndarray
    embeddings: np.ndarray

    def __post_init__(self) -> None:
        idx = np.asarray(self.token_indices, dtype=np.int64)
        emb = _as_float32_matrix(self.embeddings, "block embeddings")
        if idx.shape[0] != emb.shape[0]:
            raise ValueError("token_indices and embeddings row counts differ")
        idx.setflags(write=False)
        object.__setattr__(self, "chunk_indices", tuple(int(c) for c in self.chunk_indices))
        object.__setattr__(self, "token_indices", idx)
        object.__setattr__(self, "embeddings", emb)


@dataclass(frozen=True)
class CompressedStream:
    """Pruned/merged output in the original interleaved order.

    Entries alternate visual blocks and audio chunks: every audio chunk of
    the input appears exactly once, unchanged and in order; each visual
    block sits at the position of its first originating chunk.
    """

    entries: tuple[object, ...]  # AudioEntry | VisualBlock

    def audio_entries(self) -> list[AudioEntry]:
        return [e for e in self.entries if isinstance(e, AudioEntry)]

    def visual_blocks(self) -> list[VisualBlock]:
        return [e for e in self.entries if isinstance(e, VisualBlock)]


@dataclass(frozen=True)
class Stats:
    """Compression accounting for one pipeline run.

    ``merges`` counts pairwise merge events (chunks absorbed into an earlier
    group), so k identical chunks collapsing to one block report k - 1.
    ``zero_norm_warnings`` counts degenerate cosine evaluations that fell
    back to similarity 0.
    """

    original_video_tokens: int
    retained_video_tokens: int
    original_audio_tokens: int
    segments: int
    merges: int
    zero_norm_warnings: int = 0
    video_compression: float = field(init=False)
    total_compression: float = field(init=False)

    def __post_init__(self) -> None:
        if self.original_video_tokens <= 0:
            raise ValueError("original_video_tokens must be positive")
        video = 1.0 - self.retained_video_tokens / self.original_video_tokens
        total_orig = self.original_video_tokens + self.original_audio_tokens
        total_kept = self.retained_video_tokens + self.original_audio_tokens
        object.__setattr__(self, "video_compression", video)
        object.__setattr__(self, "total_compression", 1.0 - total_kept / total_orig)


def cosine_sim(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two vectors, accumulated in float64.

    A zero-norm input is degenerate: the result is defined as 0.0 and a
    ZeroNormWarning is emitted, so pruning stays deterministic on padded or
    silent chunks instead of propagating NaNs.
    """
    va = np.asarray(a, dtype=np.float64).reshape(-1)
    vb = np.asarray(b, dtype=np.float64).reshape(-1)
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch: {va.shape[0]} vs {vb.shape[0]}")
    na = np.sqrt(va @ va)
    nb = np.sqrt(vb @ vb)
    if na == 0.0 or nb == 0.0:
        warnings.warn("zero-norm vector in cosine similarity", ZeroNormWarning, stacklevel=2)
        return 0.0
    return float(min(1.0, max(-1.0, (va @ vb) / (na * nb))))


def row_cosines(rows: np.ndarray, vec: np.ndarray) -> tuple[np.ndarray, int]:
    """Cosine of every row of ``rows`` against ``vec``.

    Returns float32 scores in [-1, 1] and the count of degenerate
    evaluations (zero-norm row or zero-norm ``vec``), which scored 0.
    """
    mat = np.asarray(rows, dtype=np.float64)
    v = np.asarray(vec, dtype=np.float64).reshape(-1)
    if mat.shape[1] != v.shape[0]:
        raise ValueError(f"dimension mismatch: rows have {mat.shape[1]}, vec has {v.shape[0]}")
    vnorm = np.sqrt(v @ v)
    if vnorm == 0.0:
        return np.zeros(mat.shape[0], dtype=np.float32), mat.shape[0]
    norms = np.sqrt(np.einsum("ij,ij->i", mat, mat))
    zero = norms == 0.0
    norms[zero] = 1.0
    scores = (mat @ v) / (norms * vnorm)
    scores[zero] = 0.0
    np.clip(scores, -1.0, 1.0, out=scores)
    return scores.astype(np.float32), int(zero.sum())


def mean_pool(rows: np.ndarray) -> np.ndarray:
    """Arithmetic mean over the rows of an N x d matrix (float64 accumulator)."""
    mat = np.asarray(rows)
    if mat.ndim != 2 or mat.shape[0] == 0:
        raise ValueError("empty pool")
    return mat.mean(axis=0, dtype=np.float64).astype(np.float32)
