"""Closed-form scalar fields on the flat torus.

A field is a finite sum of plane-wave modes

    f(x, y) = sum_i  a_i * cos(m_i x + n_i y + theta_i),   (m_i, n_i) integers,

optionally augmented by compactly supported bump perturbations (see
:mod:`neumann_domains.cracked`).  Values, gradients and Hessians are exact;
nothing in the evaluation path uses finite differences.
"""

import json

import numpy as np
from scipy.special import expi

from . import torus
from .errors import NotAnEigenfunctionField


# ---------------------------------------------------------------------------
# bump building blocks, all supported in (-1, 1)
# ---------------------------------------------------------------------------

def bump_gamma(y, order=0):
    """exp(-1/(1-y^2)) inside (-1,1), zero outside; derivatives up to order 2."""
    y = np.asarray(y, dtype=float)
    inside = np.abs(y) < 1.0
    out = np.zeros_like(y)
    ys = np.where(inside, y, 0.0)
    with np.errstate(divide="ignore", over="ignore"):
        g = np.exp(-1.0 / (1.0 - ys * ys))
    if order == 0:
        out[inside] = g[inside]
        return out
    w = -2.0 * ys / (1.0 - ys * ys) ** 2
    if order == 1:
        out[inside] = (g * w)[inside]
        return out
    if order == 2:
        wp = -2.0 * (1.0 + 3.0 * ys * ys) / (1.0 - ys * ys) ** 3
        out[inside] = (g * (w * w + wp))[inside]
        return out
    raise ValueError("order must be 0, 1 or 2")


def bump_alpha(x, K, order=0):
    """Odd bump -K * x * exp(-1/(1-x^2)); integrates to zero over (-1,1)."""
    x = np.asarray(x, dtype=float)
    if order == 0:
        return -K * x * bump_gamma(x)
    if order == 1:
        return -K * (bump_gamma(x) + x * bump_gamma(x, 1))
    raise ValueError("order must be 0 or 1")


def bump_beta(x, K):
    """Antiderivative of bump_alpha from -1, in closed form.

    With H(v) = (1-v) e^{-1/(1-v)} + Ei(-1/(1-v)) one has
    beta(x) = (K/2) * H(x^2); H(1) = 0 gives compact support.
    """
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1.0
    out = np.zeros_like(x)
    v = np.where(inside, x * x, 0.0)
    with np.errstate(divide="ignore", over="ignore"):
        s = 1.0 - v
        h = s * np.exp(-1.0 / s) + expi(-1.0 / s)
    out[inside] = (0.5 * K * h)[inside]
    return out


# peak of x*exp(-1/(1-x^2)) on (0,1): at x* solving (1-x*^2)^2 = 2 x*^2
BUMP_ARGMAX = float((np.sqrt(6.0) - np.sqrt(2.0)) / 2.0)
BUMP_PEAK = float(BUMP_ARGMAX * np.exp(-1.0 / (1.0 - BUMP_ARGMAX ** 2)))


class CrackPerturbation:
    """One compactly supported perturbation term beta(xi) * gamma(eta).

    Local coordinates (xi, eta) in (-1,1)^2 are obtained by translating to
    ``center``, rotating into ``frame`` (first column along the base gradient
    at the center) and dividing by ``scale``.  ``A`` is the base-field slope
    in local units, ``K`` the bump amplitude.
    """

    def __init__(self, center, frame, scale, A, K):
        self.center = np.asarray(center, dtype=float)
        self.frame = np.asarray(frame, dtype=float)
        self.scale = float(scale)
        self.A = float(A)
        self.K = float(K)

    def local_coords(self, pts):
        d = torus.delta(self.center, pts)
        return d @ self.frame / self.scale

    def value(self, pts):
        loc = self.local_coords(pts)
        return bump_beta(loc[..., 0], self.K) * bump_gamma(loc[..., 1])

    def gradient(self, pts):
        loc = self.local_coords(pts)
        xi, eta = loc[..., 0], loc[..., 1]
        du = bump_alpha(xi, self.K) * bump_gamma(eta)
        dv = bump_beta(xi, self.K) * bump_gamma(eta, 1)
        grad_loc = np.stack([du, dv], axis=-1) / self.scale
        return grad_loc @ self.frame.T

    def hessian(self, pts):
        loc = self.local_coords(pts)
        xi, eta = loc[..., 0], loc[..., 1]
        huu = bump_alpha(xi, self.K, 1) * bump_gamma(eta)
        huv = bump_alpha(xi, self.K) * bump_gamma(eta, 1)
        hvv = bump_beta(xi, self.K) * bump_gamma(eta, 2)
        h_loc = np.empty(loc.shape[:-1] + (2, 2))
        h_loc[..., 0, 0] = huu
        h_loc[..., 0, 1] = huv
        h_loc[..., 1, 0] = huv
        h_loc[..., 1, 1] = hvv
        h_loc /= self.scale ** 2
        return np.einsum("ia,...ab,jb->...ij", self.frame, h_loc, self.frame)

    def to_dict(self):
        return {
            "center": self.center.tolist(),
            "frame": self.frame.tolist(),
            "scale": self.scale,
            "A": self.A,
            "K": self.K,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["center"], d["frame"], d["scale"], d["A"], d["K"])


class MorseField:
    """Trigonometric field on the torus with exact derivatives.

    Parameters
    ----------
    modes : sequence of (a, m, n, theta)
        Amplitude, integer wave vector and phase of each mode.
    perturbations : sequence of CrackPerturbation, optional
    """

    def __init__(self, modes, perturbations=()):
        modes = list(modes)
        if not modes:
            raise ValueError("at least one mode is required")
        self.amp = np.array([mo[0] for mo in modes], dtype=float)
        self.wave = np.array([[mo[1], mo[2]] for mo in modes], dtype=float)
        if not np.allclose(self.wave, np.round(self.wave)):
            raise ValueError("wave vectors must be integer pairs")
        self.phase = np.array([mo[3] for mo in modes], dtype=float)
        self.perturbations = list(perturbations)

    # -- evaluation ---------------------------------------------------------

    def value(self, pts):
        pts = np.asarray(pts, dtype=float)
        ph = pts @ self.wave.T + self.phase
        out = np.cos(ph) @ self.amp
        for p in self.perturbations:
            out = out + p.value(pts)
        return out

    def gradient(self, pts):
        pts = np.asarray(pts, dtype=float)
        ph = pts @ self.wave.T + self.phase
        out = -(np.sin(ph) * self.amp) @ self.wave
        for p in self.perturbations:
            out = out + p.gradient(pts)
        return out

    def hessian(self, pts):
        pts = np.asarray(pts, dtype=float)
        ph = pts @ self.wave.T + self.phase
        coef = -np.cos(ph) * self.amp                       # (..., M)
        outer = self.wave[:, :, None] * self.wave[:, None, :]  # (M, 2, 2)
        out = np.einsum("...m,mij->...ij", coef, outer)
        for p in self.perturbations:
            out = out + p.hessian(pts)
        return out

    def evaluate(self, x, order=0):
        """Value (order 0), gradient (order 1) or Hessian (order 2) at x."""
        if order == 0:
            return self.value(x)
        if order == 1:
            return self.gradient(x)
        if order == 2:
            return self.hessian(x)
        raise ValueError("order must be 0, 1 or 2")

    # -- structure ----------------------------------------------------------

    @property
    def is_eigenfunction(self):
        """True when all modes share |k|^2 and no perturbations are present."""
        if self.perturbations:
            return False
        k2 = np.sum(self.wave ** 2, axis=1)
        return bool(np.all(k2 == k2[0]))

    def eigenvalue(self):
        """Laplace eigenvalue |k|^2 shared by all modes."""
        if not self.is_eigenfunction:
            raise NotAnEigenfunctionField(
                "field is not a pure eigenfunction of the torus Laplacian")
        return float(np.sum(self.wave[0] ** 2))

    def negated(self):
        """The field -f (perturbation amplitudes flip with the modes)."""
        modes = [(-a, int(m), int(n), th) for a, (m, n), th in
                 zip(self.amp, self.wave, self.phase)]
        perts = [CrackPerturbation(p.center, p.frame, p.scale, p.A, -p.K)
                 for p in self.perturbations]
        return MorseField(modes, perts)

    # -- serialization ------------------------------------------------------

    def to_dict(self):
        return {
            "modes": [
                {"a": float(a), "m": int(m), "n": int(n), "theta": float(th)}
                for a, (m, n), th in zip(self.amp, self.wave, self.phase)
            ],
            "perturbations": [p.to_dict() for p in self.perturbations],
        }

    @classmethod
    def from_dict(cls, d):
        modes = [(mo["a"], mo["m"], mo["n"], mo.get("theta", 0.0))
                 for mo in d["modes"]]
        perts = [CrackPerturbation.from_dict(p)
                 for p in d.get("perturbations", [])]
        return cls(modes, perts)

    def to_json(self, path=None):
        s = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(s + "\n")
        return s

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def load_bundled(name):
    """Load one of the fields shipped with the package ('separable',
    'anisotropic' or 'lambda17')."""
    from importlib import resources
    ref = resources.files("neumann_domains") / "bundled" / (name + ".json")
    return MorseField.from_dict(json.loads(ref.read_text()))


BUNDLED_NAMES = ("separable", "anisotropic", "lambda17")
