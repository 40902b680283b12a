"""Walk through the partition of f = cos x + cos y.

The four critical points sit on the half-period lattice, the eight Neumann
lines are coordinate segments, and the four domains are congruent squares.
Writes an SVG figure next to this script.
"""

import os

import numpy as np

from neumann_domains import (build_complex, load_bundled, nodal_set,
                             render_complex_svg)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

field = load_bundled("separable")
cx = build_complex(field, seed_grid=16)

print("critical points:")
for c in cx.critical_points:
    print(f"  {c.kind:8s} at ({c.position[0]:.6f}, {c.position[1]:.6f}) "
          f"f = {c.value:+.3f}  degree {c.degree}")

print(f"\ncomplex: V = {len(cx.critical_points)}, E = {len(cx.lines)}, "
      f"F = {len(cx.faces)}  (V - E + F = "
      f"{len(cx.critical_points) - len(cx.lines) + len(cx.faces)})")

for face in cx.faces:
    print(f"  face {face.index}: area {face.area:.4f}, "
          f"{face.classification}, saddles {face.saddle_indices}")

print("\nangles at the maximum (degrees):",
      np.round(np.rad2deg(cx.angles_at(0)), 3))

nodal = nodal_set(field, 256)
svg = os.path.join(OUT, "separable.svg")
render_complex_svg(cx, nodal, path=svg)
print(f"\nnodal set: {len(nodal)} polyline(s); figure written to {svg}")
