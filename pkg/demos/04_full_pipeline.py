"""End-to-end compression of the desk-scale benchmark stream.

Runs the full offline pipeline (predictor scoring, union selection,
depth-score segmentation, greedy merging) on the default 32-chunk
benchmark and prints the compression accounting.
"""

from avpress.core import PipelineConfig
from avpress.evalkit import default_benchmark_spec, gen_synthetic, marker_retention
from avpress.pipeline import compress, compression_ratio
from avpress.predictor import init_weights

spec = default_benchmark_spec()
stream, truth = gen_synthetic(spec)
weights = init_weights(0, Q=8, d_h=16, d_a=spec.audio_dim, d=spec.dim, layers=2)

result = compress(stream, weights, PipelineConfig())
stats = result.stats

print(f"chunks: {len(stream)}, tokens per chunk: {spec.token_count}")
print(f"segments: {stats.segments}, merge events: {stats.merges}")
print(f"video tokens: {stats.original_video_tokens} -> {stats.retained_video_tokens}")
ratios = compression_ratio(stats)
print(f"video compression: {ratios['video']:.1%}")
print(f"total compression (audio included, audio kept whole): {ratios['total']:.1%}")
print(f"audio tokens preserved: {stats.original_audio_tokens}")

ideal = compress(stream, None, PipelineConfig(), pooled_override=truth.semantic_directions)
print(f"\nwith idealized semantics, planted-marker retention: "
      f"{marker_retention(ideal, truth):.1%}")
