"""Depth-score segmentation and greedy merging over a synthetic stream.

The generated stream repeats chunks inside scenes and rotates its content
direction at two planted scene changes. Similarity valleys show up exactly
at the cuts; within segments, near-duplicate consecutive chunks collapse
into averaged blocks.
"""

from avpress.core import PipelineConfig
from avpress.evalkit import SynthSpec, gen_synthetic
from avpress.pipeline import compress
from avpress.temporal import adjacent_similarities, boundaries, depth_scores

spec = SynthSpec(
    seed=3,
    t=12,
    frames=1,
    height=6,
    width=6,
    scene_changes=(4, 8),
    repeat_prob=0.5,
    drift_angle=0.5,
)
stream, truth = gen_synthetic(spec)

sims = adjacent_similarities(stream)
dv = depth_scores(sims.visual, len(stream))
da = depth_scores(sims.audio, len(stream))
print("pair  visual sim  visual depth")
for i, (s, d) in enumerate(zip(sims.visual, dv)):
    marker = "  <- planted cut" if (i + 1) in truth.scene_changes else ""
    print(f"({i:2d},{i + 1:2d})  {s:+.3f}      {d:+.3f}{marker}")

starts = boundaries(dv, da, PipelineConfig().depth_threshold)
print(f"\nboundary chunk indices: {starts.tolist()} (planted: {list(truth.scene_changes)})")

result = compress(stream, None, PipelineConfig(), pooled_override=truth.semantic_directions)
print(f"segments: {result.segment_plan.segments}")
for seg, groups in zip(result.segment_plan.segments, result.segment_plan.merge_groups):
    print(f"  segment {seg}: merge groups {groups}")
print(
    f"\n{result.stats.original_video_tokens} video tokens -> "
    f"{result.stats.retained_video_tokens} retained "
    f"({result.stats.video_compression:.1%} compression, {result.stats.merges} merges)"
)
