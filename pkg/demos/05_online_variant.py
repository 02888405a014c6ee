"""The causal online variant: local chunk-to-chunk filtering, no lookahead.

Streams a sequence where some chunks nearly repeat their predecessor. Each
near-duplicate arrival evicts the chunk before it; per-chunk selection then
runs on the survivors only.
"""

import numpy as np

from avpress.core import AudioChunk, InterleavedStream, PipelineConfig, VisualChunk
from avpress.pipeline import compress
from avpress.predictor import init_weights
from avpress.temporal import online_filter

rng = np.random.default_rng(1)
rows_list = []
for i in range(10):
    if i in (1, 2, 5, 8):  # near-copies of the previous chunk
        rows_list.append(rows_list[-1] + rng.normal(0, 1e-4, rows_list[-1].shape))
    else:
        rows_list.append(rng.standard_normal((16, 8)))
stream = InterleavedStream(
    tuple(
        (
            VisualChunk(1, 4, 4, rows.astype(np.float32)),
            AudioChunk(rng.standard_normal((2, 6)).astype(np.float32)),
        )
        for rows in rows_list
    )
)

survivors = online_filter(stream, PipelineConfig().online_threshold)
print("chunks 1, 2, 5, 8 nearly repeat their predecessors")
print(f"survivors: {survivors} ({len(stream) - len(survivors)} chunks evicted)")

weights = init_weights(2, Q=4, d_h=8, d_a=6, d=8, layers=1)
online = compress(stream, weights, PipelineConfig(mode="online"))
offline = compress(stream, weights, PipelineConfig())
print(f"online  video compression: {online.stats.video_compression:.1%}")
print(f"offline video compression: {offline.stats.video_compression:.1%}")
print(f"audio chunks in both outputs: "
      f"{len(online.compressed.audio_entries())} / {len(offline.compressed.audio_entries())}")
