"""Audio-to-video semantic predictor: forward pass and training losses.

The predictor maps a chunk's audio tokens to Q predicted visual-semantic
embeddings through learnable-query cross-attention layers and a small MLP
head. Architecture choices the weight format pins down (byte 1 in the
weight file header):

  per layer:  pre-norm of queries -> single-head scaled dot-product
              cross-attention over the audio tokens -> residual add ->
              post-norm
  head:       linear -> relu -> linear, mapping d_h to the visual dim d

Losses exist for evaluation and fixture construction; there is no training
loop here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import mean_pool

ARCH_PRENORM_RELU = 1  # architecture-choice byte recorded in weight files

_NORM_EPS = 1e-5


@dataclass(frozen=True)
class LayerWeights:
    """One cross-attention layer (single head)."""

    norm1_gain: np.ndarray  # (d_h,)
    norm1_bias: np.ndarray  # (d_h,)
    w_q: np.ndarray  # (d_h, d_h)
    w_k: np.ndarray  # (d_a, d_h)
    w_v: np.ndarray  # (d_a, d_h)
    w_o: np.ndarray  # (d_h, d_h)
    norm2_gain: np.ndarray  # (d_h,)
    norm2_bias: np.ndarray  # (d_h,)


@dataclass(frozen=True)
class PredictorWeights:
    """Learnable queries, attention layers, and the projection head."""

    queries: np.ndarray  # (Q, d_h)
    layers: tuple[LayerWeights, ...]
    head_w1: np.ndarray  # (d_h, d_h)
    head_b1: np.ndarray  # (d_h,)
    head_w2: np.ndarray  # (d_h, d)
    head_b2: np.ndarray  # (d,)

    def __post_init__(self) -> None:
        q, d_h = self.queries.shape
        if q < 1:
            raise ValueError("need at least one query")
        if len(self.layers) < 1:
            raise ValueError("need at least one layer")
        d_a = self.layers[0].w_k.shape[0]
        for i, layer in enumerate(self.layers):
            _check_shape(layer.w_q, (d_h, d_h), f"layer {i} w_q")
            _check_shape(layer.w_k, (d_a, d_h), f"layer {i} w_k")
            _check_shape(layer.w_v, (d_a, d_h), f"layer {i} w_v")
            _check_shape(layer.w_o, (d_h, d_h), f"layer {i} w_o")
            for name in ("norm1_gain", "norm1_bias", "norm2_gain", "norm2_bias"):
                _check_shape(getattr(layer, name), (d_h,), f"layer {i} {name}")
        _check_shape(self.head_w1, (d_h, d_h), "head_w1")
        _check_shape(self.head_b1, (d_h,), "head_b1")
        if self.head_w2.shape[0] != d_h:
            raise ValueError(f"head_w2 rows {self.head_w2.shape[0]} != d_h {d_h}")
        _check_shape(self.head_b2, (self.head_w2.shape[1],), "head_b2")

    @property
    def dims(self) -> dict[str, int]:
        return {
            "Q": self.queries.shape[0],
            "d_h": self.queries.shape[1],
            "d_a": self.layers[0].w_k.shape[0],
            "d": self.head_w2.shape[1],
            "layers": len(self.layers),
        }


@dataclass(frozen=True)
class LossConfig:
    """Weights for the combined alignment + contrastive objective."""

    lambda_cos: float = 5.0
    temperature: float = 0.07

    def __post_init__(self) -> None:
        if self.temperature <= 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")


def _check_shape(arr: np.ndarray, expected: tuple[int, ...], name: str) -> None:
    if arr.shape != expected:
        raise ValueError(f"{name} has shape {arr.shape}, expected {expected}")


def _layernorm(x: np.ndarray, gain: np.ndarray, bias: np.ndarray) -> np.ndarray:
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mean) / np.sqrt(var + _NORM_EPS) * gain + bias


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    # max-subtraction keeps exp() bounded; logits/0.07-scale exponents otherwise overflow
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def a2v_forward(
    audio, weights: PredictorWeights, return_attention: bool = False
):
    """Predict Q visual-semantic embeddings from one chunk's audio tokens.

    ``audio`` may be an AudioChunk or a raw (L, d_a) matrix. Returns a
    (Q, d) float32 matrix; with ``return_attention`` also returns the list
    of per-layer (Q, L) attention weight matrices.
    """
    tokens = getattr(audio, "embeddings", audio)
    tokens = np.asarray(tokens, dtype=np.float64)
    if tokens.ndim != 2:
        raise ValueError(f"audio tokens must be 2-D, got shape {tokens.shape}")
    d_a = weights.layers[0].w_k.shape[0]
    if tokens.shape[1] != d_a:
        raise ValueError(
            f"audio dim {tokens.shape[1]} does not match w_k input dim {d_a}"
        )

    d_h = weights.queries.shape[1]
    scale = 1.0 / np.sqrt(d_h)
    x = weights.queries.astype(np.float64)
    attentions = []
    for layer in weights.layers:
        normed = _layernorm(x, layer.norm1_gain.astype(np.float64), layer.norm1_bias.astype(np.float64))
        q = normed @ layer.w_q.astype(np.float64)
        k = tokens @ layer.w_k.astype(np.float64)
        v = tokens @ layer.w_v.astype(np.float64)
        attn = _softmax_rows(q @ k.T * scale)
        attentions.append(attn.astype(np.float32))
        x = x + (attn @ v) @ layer.w_o.astype(np.float64)
        x = _layernorm(x, layer.norm2_gain.astype(np.float64), layer.norm2_bias.astype(np.float64))

    hidden = np.maximum(x @ weights.head_w1.astype(np.float64) + weights.head_b1.astype(np.float64), 0.0)
    out = (hidden @ weights.head_w2.astype(np.float64) + weights.head_b2.astype(np.float64)).astype(np.float32)
    if return_attention:
        return out, attentions
    return out


def predict_semantics(audio, weights: PredictorWeights) -> np.ndarray:
    """Mean-pool the predicted embeddings into one chunk-level semantics vector."""
    return mean_pool(a2v_forward(audio, weights))


def _pairwise_cosines(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cosine similarity of every row of a against every row of b (64-bit)."""
    a64 = a.astype(np.float64)
    b64 = b.astype(np.float64)
    an = np.sqrt(np.einsum("ij,ij->i", a64, a64))
    bn = np.sqrt(np.einsum("ij,ij->i", b64, b64))
    an[an == 0.0] = 1.0
    bn[bn == 0.0] = 1.0
    sims = (a64 @ b64.T) / np.outer(an, bn)
    return np.clip(sims, -1.0, 1.0)


def _check_batch(preds: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(preds, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError(f"preds shape {p.shape} != targets shape {t.shape}")
    if p.ndim != 3 or p.shape[0] * p.shape[1] < 1:
        raise ValueError("expected non-empty (B, T, d) batches")
    return p, t


def cos_loss(preds: np.ndarray, targets: np.ndarray) -> float:
    """Mean over (b, t) of 1 - cosine(pred, target)."""
    p, t = _check_batch(preds, targets)
    d = p.shape[-1]
    pf = p.reshape(-1, d)
    tf = t.reshape(-1, d)
    pn = np.sqrt(np.einsum("ij,ij->i", pf, pf))
    tn = np.sqrt(np.einsum("ij,ij->i", tf, tf))
    pn[pn == 0.0] = 1.0
    tn[tn == 0.0] = 1.0
    sims = np.clip(np.einsum("ij,ij->i", pf, tf) / (pn * tn), -1.0, 1.0)
    return float(np.mean(1.0 - sims))


def contrastive_loss(preds: np.ndarray, targets: np.ndarray, cfg: LossConfig) -> float:
    """Softmax-style contrastive loss over in-batch cross-video negatives.

    For prediction (b, t) the positive is its own target; the negatives are
    every target chunk of every *other* video in the batch. Chunks of the
    same video are excluded so temporally adjacent near-duplicates are not
    punished as false negatives. B = 1 therefore has no negatives and the
    loss is exactly 0.
    """
    p, t = _check_batch(preds, targets)
    if cfg.temperature <= 0:
        raise ValueError("temperature must be positive")
    b, n, d = p.shape
    sims = _pairwise_cosines(p.reshape(-1, d), t.reshape(-1, d)) / cfg.temperature
    sims = sims.reshape(b, n, b, n)

    total = 0.0
    for bi in range(b):
        for ti in range(n):
            pos = sims[bi, ti, bi, ti]
            negs = np.concatenate(
                [sims[bi, ti, bj].ravel() for bj in range(b) if bj != bi]
            ) if b > 1 else np.empty(0)
            logits = np.concatenate(([pos], negs))
            m = logits.max()
            # -log softmax with max-subtraction; exact 0.0 when no negatives
            total += np.log(np.exp(logits - m).sum()) + m - pos
    return float(total / (b * n))


def total_loss(preds: np.ndarray, targets: np.ndarray, cfg: LossConfig) -> float:
    """lambda_cos * alignment loss + contrastive loss."""
    return cfg.lambda_cos * cos_loss(preds, targets) + contrastive_loss(preds, targets, cfg)


def init_weights(
    seed: int, Q: int = 128, d_h: int = 256, d_a: int = 128, d: int = 256, layers: int = 2
) -> PredictorWeights:
    """Reproducible pseudo-random weights: same seed and dims, same bits."""
    if min(Q, d_h, d_a, d, layers) < 1:
        raise ValueError("all dims must be positive")
    rng = np.random.default_rng(seed)

    def mat(rows: int, cols: int) -> np.ndarray:
        return (rng.standard_normal((rows, cols)) / np.sqrt(rows)).astype(np.float32)

    layer_list = []
    for _ in range(layers):
        layer_list.append(
            LayerWeights(
                norm1_gain=np.ones(d_h, dtype=np.float32),
                norm1_bias=np.zeros(d_h, dtype=np.float32),
                w_q=mat(d_h, d_h),
                w_k=mat(d_a, d_h),
                w_v=mat(d_a, d_h),
                w_o=mat(d_h, d_h),
                norm2_gain=np.ones(d_h, dtype=np.float32),
                norm2_bias=np.zeros(d_h, dtype=np.float32),
            )
        )
    return PredictorWeights(
        queries=mat(Q, d_h),
        layers=tuple(layer_list),
        head_w1=mat(d_h, d_h),
        head_b1=np.zeros(d_h, dtype=np.float32),
        head_w2=mat(d_h, d),
        head_b2=np.zeros(d, dtype=np.float32),
    )
