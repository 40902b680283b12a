"""Cusp geometry: exponents, level-line decay, and truncated domains.

A cusp forms where two boundary lines meet an extremum tangentially; locally
the boundary pair separates like xi**alpha with alpha the Hessian eigenvalue
ratio.  The level line f = t*f(extremum) cut through the cusp has length
o(sqrt(1-t)), and cutting the cusp off at such a line (natural boundary on
the cut) barely moves the low spectrum.
"""

import numpy as np

from neumann_domains import (build_complex, cusp_length_decay, load_bundled,
                             mesh_domain, neumann_spectrum, truncate_domain)

field = load_bundled("lambda17")
cx = build_complex(field, 24)
face = next(f for f in cx.faces
            if len({c["crit_index"] for c in f.cusps if c["confirmed"]}) == 2)
print(f"face {face.index}: cusps at both extrema")
for c in face.cusps:
    print(f"  crit {c['crit_index']}: meeting angle "
          f"{np.rad2deg(c['angle']):.3f} deg, alpha = {c['alpha_hessian']:.4f} "
          f"(fit {c['alpha_fit']:.4f}, r2 {c['r2']:.5f})")

print("\nnormalized level-line length L/sqrt(1-t) near each cusp:")
recs = cusp_length_decay(field, face, (0.9, 0.99, 0.999),
                         cx.critical_points)
for t, ci, L, Ln in recs:
    print(f"  t={t:6.3f}  cusp {int(ci):3d}  L = {L:.6f}  "
          f"L/sqrt(1-t) = {Ln:.5f}")

tr = truncate_domain(field, face, 0.9, cx.critical_points)
print(f"\ntruncation at t=0.9 removes area {tr.removed_area:.5f} "
      f"of {face.area:.5f}")

print("\nspectra: graded full mesh vs truncation fallback")
m_full = mesh_domain(field, face, 0.04, critical_points=cx.critical_points)
mu_full, _ = neumann_spectrum(m_full, 8)
for t in (0.99, 0.999):
    m_t = mesh_domain(field, face, 0.04, t=t,
                      critical_points=cx.critical_points)
    mu_t, _ = neumann_spectrum(m_t, 8)
    rel = np.max(np.abs(mu_t[1:] - mu_full[1:]) / mu_full[1:])
    print(f"  t={t}: max relative shift of mu_1..mu_7 = {rel:.2%}")
print("  full-mesh mu:", np.round(mu_full, 3))
