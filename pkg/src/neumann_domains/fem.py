"""Piecewise-linear finite elements for the Neumann Laplacian on a mesh.

No essential boundary conditions are imposed anywhere: the discrete operator
is the Galerkin projection of the Dirichlet energy form onto P1 functions,
so natural (Neumann) conditions hold on every boundary piece, including
truncation cuts and both sides of a crack slit.
"""

import json

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (AmbiguousCluster, NonSPDMass, NotAnEigenfunctionField,
                     SolverBreakdown, SpectrumTooShort)

DENSE_LIMIT = 3000
CLUSTER_TOL = 1e-3


def assemble_p1(mesh):
    """Stiffness and mass matrices for piecewise-linear elements.

    K is symmetric positive semidefinite with the constants in its kernel on
    a connected mesh; M is symmetric positive definite.
    """
    v = mesh.vertices
    t = mesh.triangles
    x = v[t, 0]
    y = v[t, 1]
    area = 0.5 * ((x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0])
                  - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0]))
    if np.any(area <= 0):
        raise NonSPDMass(f"{int(np.sum(area <= 0))} non-positive triangle areas")
    # gradients of barycentric coordinates
    bx = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]],
                  axis=1) / (2 * area[:, None])
    by = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]],
                  axis=1) / (2 * area[:, None])
    n = len(v)
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    ke = (bx[:, :, None] * bx[:, None, :] + by[:, :, None] * by[:, None, :])
    ke *= area[:, None, None]
    K = sp.coo_matrix((ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    me = np.tile(np.array([[2, 1, 1], [1, 2, 1], [1, 1, 2]]) / 12.0,
                 (len(t), 1, 1)) * area[:, None, None]
    M = sp.coo_matrix((me.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    return K, M


def neumann_spectrum(mesh, k):
    """The k smallest Neumann eigenvalues and M-orthonormal eigenvectors.

    Dense solve below DENSE_LIMIT vertices, shift-invert Lanczos above.
    """
    K, M = assemble_p1(mesh)
    n = K.shape[0]
    if not k < n / 2:
        raise ValueError(f"k = {k} too large for {n} vertices")
    if n <= DENSE_LIMIT:
        vals, vecs = scipy.linalg.eigh(K.toarray(), M.toarray(),
                                       subset_by_index=(0, k - 1))
        return vals, vecs
    try:
        v0 = np.full(n, 1.0 / np.sqrt(n))
        vals, vecs = spla.eigsh(K, k=k, M=M, sigma=-0.1, which="LM", v0=v0)
    except Exception as exc:            # ARPACK or factorization failure
        raise SolverBreakdown(str(exc)) from exc
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def spectral_position(spectrum, lam, tol=CLUSTER_TOL):
    """Number of Neumann eigenvalues strictly below lam.

    Discretization scatters a degenerate eigenvalue into a numerical
    cluster, so the count uses the guarded threshold lam*(1 - tol).
    Returns (position, cluster_indices); when lam is in the spectrum the
    position equals the least index attaining it.
    """
    mu = np.asarray(spectrum, dtype=float)
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if lam == 0.0:
        return 0, [int(i) for i in np.flatnonzero(np.abs(mu) <= tol)]
    if np.max(mu) <= lam:
        raise SpectrumTooShort(
            f"spectrum reaches only {np.max(mu):.6g} <= lam = {lam:.6g}")
    thresh = lam * (1.0 - tol)
    in_guard = (mu >= lam * (1.0 - 2.0 * tol)) & (mu < thresh)
    if np.any(in_guard):
        raise AmbiguousCluster(
            f"eigenvalues {mu[in_guard]} fall just below the counting "
            f"threshold {thresh:.6g}; tighten the mesh or the tolerance")
    position = int(np.sum(mu < thresh))
    cluster = [int(i) for i in np.flatnonzero(np.abs(mu - lam) <= tol * lam)]
    return position, cluster


def restriction_residual(field, mesh, lam=None):
    """Discrete witness that the field restricts to a Neumann eigenfunction.

    Samples the field at the mesh vertices and measures the residual
    functional K f - lam M f in the energy-dual norm,

        r = sqrt(R^T (K+M)^{-1} R) / (lam * ||f||_M),   R = K f - lam M f,

    which tends to zero at first order or better in h exactly when the
    restriction solves the Neumann problem with eigenvalue lam.  (The plain
    coefficient-vector norm of R only converges on structured meshes, where
    neighbouring element errors cancel.)  For lam = 0 the normalization is
    ||f||_M alone.
    """
    if not field.is_eigenfunction:
        raise NotAnEigenfunctionField(
            "restriction residual requires a Laplacian eigenfunction")
    if lam is None:
        lam = field.eigenvalue()
    K, M = assemble_p1(mesh)
    F = field.value(mesh.vertices)
    R = K @ F - lam * (M @ F)
    z = spla.spsolve((K + M).tocsc(), R)
    dual = np.sqrt(max(float(z @ R), 0.0))
    scale = np.sqrt(float(F @ (M @ F)))
    if lam == 0.0:
        return float(dual / scale)
    return float(dual / (lam * scale))


class SpectrumReport:
    """Bundle of spectrum, spectral position and residual for one domain."""

    def __init__(self, eigenvalues, lam, position, cluster, residual,
                 mesh_params, spectrum_distance=None):
        self.eigenvalues = [float(m) for m in eigenvalues]
        self.lam = float(lam)
        self.position = int(position)
        self.cluster = [int(c) for c in cluster]
        self.residual = None if residual is None else float(residual)
        self.mesh_params = mesh_params
        self.spectrum_distance = spectrum_distance

    def to_dict(self):
        return {
            "mu": self.eigenvalues,
            "lambda": self.lam,
            "position": self.position,
            "cluster": self.cluster,
            "residual": self.residual,
            "dist_to_spectrum": self.spectrum_distance,
            "mesh": self.mesh_params,
        }

    def to_json(self, path=None):
        s = json.dumps(self.to_dict(), sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(s + "\n")
        return s


def domain_spectrum_report(field, mesh, lam, k, tol=CLUSTER_TOL):
    """Compute spectrum, position of lam, residual and distances in one go."""
    mu, _ = neumann_spectrum(mesh, k)
    position, cluster = spectral_position(mu, lam, tol)
    residual = None
    if field.is_eigenfunction:
        residual = restriction_residual(field, mesh, lam)
    dist = float(np.min(np.abs(np.array(mu) - lam)) / lam) if lam > 0 else None
    return SpectrumReport(mu, lam, position, cluster, residual,
                          {"h": mesh.h, "grading": mesh.grading, "t": mesh.t,
                           "vertices": int(mesh.num_vertices)},
                          spectrum_distance=dist)
