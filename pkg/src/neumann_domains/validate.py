"""Invariant suite shared by the CLI verify subcommand and the tests."""

import numpy as np
from scipy.spatial import cKDTree

from . import torus
from .complexes import build_complex
from .critical import MAX, MIN, find_critical_points

HAUSDORFF_TOL = 1e-4
ANGLE_SUM_TOL = 1e-3


def _line_cloud(cx, stride=3):
    pts = np.vstack([ln.samples[::stride] for ln in cx.lines])
    w = torus.wrap(pts)
    return np.minimum(w, torus.PERIOD * (1.0 - 1e-15))


def hausdorff_torus(a, b):
    """Symmetric Hausdorff distance between two point clouds on the torus."""
    ta = cKDTree(a, boxsize=torus.PERIOD)
    tb = cKDTree(b, boxsize=torus.PERIOD)
    d_ab, _ = tb.query(a)
    d_ba, _ = ta.query(b)
    return max(float(np.max(d_ab)), float(np.max(d_ba)))


def run_invariants(field, seed_grid=24, rng_seed=7):
    """Run the invariant suite on one field.

    Returns a list of (check_name, ok, detail) triples.
    """
    results = []
    rng = np.random.default_rng(rng_seed)

    cx = build_complex(field, seed_grid)
    V, E, F = len(cx.critical_points), len(cx.lines), len(cx.faces)
    results.append(("euler_relation", V - E + F == 0, f"V-E+F = {V - E + F}"))

    # the faces tessellate the torus
    total = sum(f.area for f in cx.faces)
    results.append(("faces_tile_torus",
                    abs(total - torus.PERIOD ** 2) < 1e-6,
                    f"sum of areas {total:.9f} vs {torus.PERIOD ** 2:.9f}"))

    # idempotent critical point census under seed doubling
    pts1 = find_critical_points(field, seed_grid, check_refinement=False)
    pts2 = find_critical_points(field, 2 * seed_grid, check_refinement=False)
    same = len(pts1) == len(pts2)
    if same:
        d = torus.pairwise_dist(np.array([p.position for p in pts1]),
                                np.array([p.position for p in pts2]))
        same = bool(np.max(np.min(d, axis=1)) < 1e-6)
    results.append(("census_idempotent", same,
                    f"{len(pts1)} vs {len(pts2)} points"))

    # angle sums
    worst = 0.0
    for c in cx.critical_points:
        if c.degree and c.degree >= 2:
            worst = max(worst, abs(float(np.sum(cx.angles_at(c.index)))
                                   - 2 * np.pi))
    results.append(("angle_sums_2pi", worst <= ANGLE_SUM_TOL,
                    f"max deviation {worst:.2e}"))

    # negation symmetry: swapped labels, same line geometry, same face count
    cxn = build_complex(field.negated(), seed_grid)
    kinds = sorted(c.kind for c in cx.critical_points)
    kinds_n = sorted(c.kind for c in cxn.critical_points)
    swap_ok = kinds == kinds_n and all(
        sum(1 for c in cx.critical_points if c.kind == k)
        == sum(1 for c in cxn.critical_points
               if c.kind == (MIN if k == MAX else MAX if k == MIN else k))
        for k in (MIN, MAX))
    hd = hausdorff_torus(_line_cloud(cx), _line_cloud(cxn))
    results.append(("negation_swaps_labels", swap_ok, "kind census swapped"))
    results.append(("negation_line_hausdorff", hd <= HAUSDORFF_TOL,
                    f"Hausdorff {hd:.2e}"))
    results.append(("negation_face_count", len(cx.faces) == len(cxn.faces),
                    f"{len(cx.faces)} vs {len(cxn.faces)}"))

    # face-extremum attachment independent of the interior samples: five
    # random interior points per face, flowed both ways in one batch
    from .flow import BACKWARD, FORWARD, flow_endpoints
    from .complexes import _point_in_polygon
    samples = []
    owners = []
    for face in cx.faces:
        lo, hi = face.polygon.min(axis=0), face.polygon.max(axis=0)
        clearance = 0.02
        got = 0
        for _ in range(4000):
            if got == 5:
                break
            p = rng.uniform(lo, hi)
            if _point_in_polygon(p[None, :], face.polygon)[0]:
                d = np.min(np.linalg.norm(face.polygon - p, axis=1))
                if d > clearance:
                    samples.append(p)
                    owners.append(face)
                    got += 1
            clearance *= 0.999   # thin faces need smaller clearance
    pts = torus.wrap(np.array(samples))
    mins = flow_endpoints(field, pts, [FORWARD] * len(pts),
                          cx.critical_points)
    maxs = flow_endpoints(field, pts, [BACKWARD] * len(pts),
                          cx.critical_points)
    bad = sum(1 for face, mn, mx in zip(owners, mins, maxs)
              if mn != face.min_index or mx != face.max_index)
    results.append(("face_attachment_stable", bad == 0,
                    f"{len(pts)} samples over {len(cx.faces)} faces, "
                    f"{bad} mismatches"))

    # deterministic export
    s1 = cx.to_json()
    s2 = build_complex(field, seed_grid).to_json()
    results.append(("deterministic_report", s1 == s2,
                    f"{len(s1)} bytes"))
    return results
