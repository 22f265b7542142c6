"""2-D slices of the loss surfaces around the teacher's logits.

Student logits are swept over a plane t + a*d1 + b*d2 spanned by two random
orthonormal directions, with the teacher point at the origin.  The ranking
loss is convex along the plane, and its low region sits at the origin.
Writes the full grid to landscape.csv for external plotting.
"""

import numpy as np

from pldlab.landscape import (
    SliceSpec,
    line_convexity_probe,
    make_slice,
    temperature_sweep,
    write_slice_csv,
)

spec = SliceSpec(
    n_classes=100, resolution=41, span=5.0,
    temperatures=(2.0, 1.0, 0.5, 0.1), loss_kinds=("pld", "kd", "dist"), seed=0,
)
grid = make_slice(spec)
print("anchor norm:", round(float(np.linalg.norm(grid.anchor)), 12),
      " d1.d2:", float(grid.d1 @ grid.d2))

mid = spec.resolution // 2
print(f"\n{'loss':<6} {'T':>4} {'origin':>9} {'corner mean':>12}")
for (kind, temp), vals in grid.values.items():
    corners = np.mean([vals[0, 0], vals[0, -1], vals[-1, 0], vals[-1, -1]])
    print(f"{kind:<6} {temp:>4} {vals[mid, mid]:>9.4f} {corners:>12.4f}")

# --- convexity along the plane --------------------------------------------------
for kind in ("pld", "kd"):
    v = line_convexity_probe(kind, spec, trials=1000, temperature=1.0)
    print(f"{kind}: {v}/1000 convexity violations on the slice")

# --- temperature sweep shares the plane -----------------------------------------
grids = temperature_sweep(spec)
same = all(np.array_equal(g.anchor, grids[0].anchor) for g in grids)
print(f"\n{len(grids)} temperature grids share the anchor and directions: {same}")

write_slice_csv(grid, "landscape.csv")
print("wrote landscape.csv (alpha,beta,loss_kind,temperature,value)")
