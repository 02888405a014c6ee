"""Spatial detail preservation: grid-wise sampling by local variation.

A flat 8x8 map gets two high-contrast positions. Frame averaging collapses
the two frames, the variation map lights up around the contrast, and
grid-wise sampling keeps one token per cell -- including the detailed ones,
replicated across both frames.
"""

import numpy as np

from avpress.core import VisualChunk
from avpress.selection import frame_average, select_spatial, spatial_variation

rng = np.random.default_rng(0)
h = w = 8
d = 16

base = rng.normal(0, 0.05, size=(h, w, d))
base[2, 3] += 4.0  # a localized detail audio cannot specify
base[6, 6] -= 4.0  # another one
frames = np.stack([base, base + rng.normal(0, 0.05, size=base.shape)])
chunk = VisualChunk(2, h, w, frames.reshape(2 * h * w, d).astype(np.float32))

variation = spatial_variation(frame_average(chunk)).values
print("spatial variation map (rounded):")
for row in variation:
    print("  " + " ".join(f"{v:5.1f}" for v in row))

picks = select_spatial(chunk, 0.1)
grid_positions = sorted({(int(p) % (h * w)) // w * w + int(p) % w for p in picks})
print(f"\nrho_spa=0.1 keeps {picks.size} token indices over 2 frames")
print("grid positions (row, col):", [(p // w, p % w) for p in grid_positions])
per_frame = picks[: picks.size // 2]
replicated = np.array_equal(picks[picks.size // 2 :], per_frame + h * w)
print("positions replicated across frames:", replicated)
