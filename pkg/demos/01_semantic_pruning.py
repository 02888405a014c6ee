"""Audio-guided semantic pruning on a single chunk.

Builds a chunk with three planted token tiers: tokens aligned with the
chunk's semantic direction (what audio can explain), a mid-similarity
background, and orthogonal "marker" tokens the audio cannot explain.
Bottom-similarity selection must keep the markers.
"""

import numpy as np

from avpress.core import PipelineConfig
from avpress.evalkit import SynthSpec, gen_synthetic
from avpress.selection import select_semantic, semantic_scores

spec = SynthSpec(
    seed=7,
    t=1,
    frames=1,
    height=4,
    width=4,
    marker_positions=(2, 9, 13),
    aligned_fraction=0.6,
)
stream, truth = gen_synthetic(spec)
chunk = stream.visual(0)

# the idealized pooled semantics = the direction the generator planted
scores = semantic_scores(chunk, truth.semantic_directions[0])
print("per-token similarity to the audio-predicted semantics:")
for j, value in enumerate(scores.values):
    tag = " <- marker" if j in truth.marker_positions else ""
    print(f"  token {j:2d}: {value:+.3f}{tag}")

kept = select_semantic(scores, PipelineConfig().rho_sem)
print(f"\nbottom-{PipelineConfig().rho_sem:.0%} selection keeps tokens: {kept.tolist()}")
missing = set(truth.marker_positions) - set(kept.tolist())
print("all markers kept" if not missing else f"markers lost: {sorted(missing)}")
