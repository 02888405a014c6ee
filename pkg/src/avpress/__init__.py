"""Audio-guided token compression for interleaved audio-visual token streams.

The pipeline scores each visual token by how well a lightweight audio-to-
video predictor explains it, keeps the least explainable half plus a
grid-sampled spatial detail budget, and merges temporally redundant chunks
within similarity-valley segments. Audio tokens always pass through
unchanged.
"""

from .core import (
    AudioChunk,
    AudioEntry,
    CompressedStream,
    InterleavedStream,
    Mode,
    PipelineConfig,
    SelectionMask,
    Stats,
    VisualBlock,
    VisualChunk,
    cosine_sim,
    mean_pool,
)
from .pipeline import PipelineResult, compress, compression_ratio
from .predictor import (
    LossConfig,
    PredictorWeights,
    a2v_forward,
    contrastive_loss,
    cos_loss,
    init_weights,
    predict_semantics,
    total_loss,
)

__all__ = [
    "AudioChunk",
    "AudioEntry",
    "CompressedStream",
    "InterleavedStream",
    "LossConfig",
    "Mode",
    "PipelineConfig",
    "PipelineResult",
    "PredictorWeights",
    "SelectionMask",
    "Stats",
    "VisualBlock",
    "VisualChunk",
    "a2v_forward",
    "compress",
    "compression_ratio",
    "contrastive_loss",
    "cos_loss",
    "cosine_sim",
    "init_weights",
    "mean_pool",
    "predict_semantics",
    "total_loss",
]

__version__ = "0.1.0"
