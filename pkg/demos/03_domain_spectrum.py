"""Neumann spectrum of a single Neumann domain and the spectral position.

The restriction of an eigenfunction to any of its Neumann domains solves the
Neumann problem there with the same eigenvalue, so lambda must show up in
the domain's spectrum.  Unlike the nodal analogue (where the restriction is
always the Dirichlet ground state), the position of lambda varies from
domain to domain.
"""

import os

import numpy as np

from neumann_domains import (build_complex, domain_spectrum_report,
                             load_bundled, mesh_domain, neumann_spectrum,
                             restriction_residual, spectral_position)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

# --- the separable square: an exactly known spectrum -----------------------
sep = load_bundled("separable")
cxs = build_complex(sep, 16)
square = cxs.faces[0]
mesh = mesh_domain(sep, square, np.pi / 64,
                   critical_points=cxs.critical_points)
mu, _ = neumann_spectrum(mesh, 9)
print("side-pi square, exact spectrum j^2 + k^2:")
print("  computed:", np.round(mu, 4))
print("  exact   : [0, 1, 1, 2, 4, 4, 5, 5, 8]")
pos, cluster = spectral_position(mu, 1.0)
print(f"  N(1) = {pos}, cluster indices {cluster}")
print(f"  restriction residual at lambda=1: "
      f"{restriction_residual(sep, mesh, 1.0):.2e}")

# --- a lambda = 17 domain ---------------------------------------------------
l17 = load_bundled("lambda17")
cx = build_complex(l17, 24)
face = next(f for f in cx.faces if not f.cusps)
print(f"\nlambda=17 domain {face.index} (area {face.area:.4f}):")
for h in (0.12, 0.06, 0.03):
    m = mesh_domain(l17, face, h, critical_points=cx.critical_points)
    rep = domain_spectrum_report(l17, m, 17.0, 10)
    print(f"  h={h:5.2f}: {m.num_vertices:5d} vertices  "
          f"mu[:4] = {np.round(rep.eigenvalues[:4], 3)}  "
          f"N(17) = {rep.position}  dist {rep.spectrum_distance:.2%}  "
          f"residual {rep.residual:.1e}")

rep.to_json(os.path.join(OUT, "spectrum_lambda17.json"))
m.to_off(os.path.join(OUT, "domain_lambda17.off"))
m.boundary_sidecar(os.path.join(OUT, "domain_lambda17_boundary.json"))
print(f"\nreport and mesh written to {OUT}")
