import numpy as np
import pytest
from scipy.optimize import brentq

from neumann_domains import build_crack_perturbation, verify_cracked
from neumann_domains.cracked import EFFECTIVE_PEAK, GAMMA0
from neumann_domains.errors import (AmplitudeTooSmall,
                                    PatchContainsCriticalPoint, PatchTooLarge)
from neumann_domains.fields import bump_alpha, bump_beta, bump_gamma


def local_model(A, K):
    """f(xi, eta) = A xi + beta(xi) gamma(eta): the flow-box construction."""

    def value(xi, eta):
        return A * xi + bump_beta(xi, K) * bump_gamma(eta)

    def grad(xi, eta):
        return np.array([A + bump_alpha(xi, K) * bump_gamma(eta),
                         bump_beta(xi, K) * bump_gamma(eta, 1)])

    def hess(xi, eta):
        return np.array([
            [bump_alpha(xi, K, 1) * bump_gamma(eta),
             bump_alpha(xi, K) * bump_gamma(eta, 1)],
            [bump_alpha(xi, K) * bump_gamma(eta, 1),
             bump_beta(xi, K) * bump_gamma(eta, 2)]])

    return value, grad, hess


def test_local_model_critical_points():
    # roots of alpha(x) * gamma(0) = -A on (0, 1), found independently
    A = 1.0
    K = 3.0 * A / EFFECTIVE_PEAK
    xstar = (np.sqrt(6) - np.sqrt(2)) / 2
    x1 = brentq(lambda x: float(bump_alpha(x, K)) * GAMMA0 + A, 1e-12, xstar)
    x2 = brentq(lambda x: float(bump_alpha(x, K)) * GAMMA0 + A, xstar,
                1 - 1e-12)
    assert 0 < x1 < x2 < 1
    _, grad, hess = local_model(A, K)
    for x in (x1, x2):
        assert np.linalg.norm(grad(x, 0.0)) < 1e-12
    H1 = hess(x1, 0.0)
    H2 = hess(x2, 0.0)
    # maximum at x1: both second derivatives negative, no mixed term
    assert H1[0, 0] < 0 and H1[1, 1] < 0 and H1[0, 1] == 0
    # saddle at x2
    assert H2[0, 0] > 0 and H2[1, 1] < 0
    # exhaustive sign analysis over the patch: exactly two critical cells
    n = 400
    xi = (np.arange(n) + 0.5) / n * 2 - 1
    X, Y = np.meshgrid(xi, xi, indexing="ij")
    G = np.stack(local_model(A, K)[1](X, Y), axis=-1)

    def mixed(s):
        return ~((s[:-1, :-1] & s[1:, :-1] & s[:-1, 1:] & s[1:, 1:])
                 | (~s[:-1, :-1] & ~s[1:, :-1] & ~s[:-1, 1:] & ~s[1:, 1:]))

    cand = mixed(G[..., 0] > 0) & mixed(G[..., 1] > 0)
    from scipy.ndimage import label
    _, ncl = label(cand)
    assert ncl == 2


def test_paper_scale_amplitude_is_too_small():
    # a bump dipping to -2A does not reach the corrected crossing level
    # -A/gamma(0), so no critical points appear
    A = 1.0
    K = 2.0 * A / 0.13205928185556093      # min alpha = -2A
    _, grad, _ = local_model(A, K)
    n = 600
    xi = (np.arange(n) + 0.5) / n * 2 - 1
    X, Y = np.meshgrid(xi, xi, indexing="ij")
    G = np.stack(grad(X, Y), axis=-1)
    assert np.min(np.linalg.norm(G, axis=-1)) > 1e-3


def test_amplitude_gate(separable):
    with pytest.raises(AmplitudeTooSmall):
        build_crack_perturbation(separable, (np.pi / 2, np.pi / 2), 0.3, 8.0)


def test_patch_too_large(separable):
    with pytest.raises(PatchTooLarge):
        build_crack_perturbation(separable, (np.pi / 2, np.pi / 2), 1.1, 60.0)


def test_patch_contains_critical_point(separable):
    with pytest.raises(PatchContainsCriticalPoint):
        build_crack_perturbation(separable, (0.15, 0.15), 0.3, 60.0)


def test_field_unchanged_outside_patch(separable, crack_field):
    pert = crack_field.perturbations[0]
    rng = np.random.default_rng(5)
    pts = rng.uniform(0, 2 * np.pi, size=(5000, 2))
    loc = pert.local_coords(pts)
    outside = np.max(np.abs(loc), axis=1) >= 1.0
    assert outside.sum() > 4000
    assert np.array_equal(crack_field.value(pts[outside]),
                          separable.value(pts[outside]))
    assert np.array_equal(crack_field.gradient(pts[outside]),
                          separable.gradient(pts[outside]))


def test_base_census_preserved(separable, crack_report):
    from neumann_domains import find_critical_points
    base = find_critical_points(separable, 16)
    tilde = crack_report.complex.critical_points
    for b in base:
        match = min(tilde, key=lambda c: np.linalg.norm(c.position
                                                        - b.position))
        assert np.linalg.norm(match.position - b.position) < 1e-9
        assert match.kind == b.kind
        assert np.allclose(match.hess_eigvals, b.hess_eigvals, atol=1e-9)


def test_verify_cracked_report(crack_report):
    rep = crack_report
    assert rep.new_max.kind == "maximum"
    assert rep.new_saddle.kind == "saddle"
    assert len(rep.cracked_faces) == 1
    assert rep.complex.is_morse_smale()
    assert rep.complex.degree(rep.new_max.index) == 1
    cx = rep.complex
    V, E, F = len(cx.critical_points), len(cx.lines), len(cx.faces)
    assert (V, E, F) == (6, 12, 6)
    d = rep.to_dict()
    assert d["cracked_faces"] == [rep.cracked_faces[0].index]


def test_reversed_amplitude_gives_minimum(separable):
    tilde = build_crack_perturbation(separable, (np.pi / 2, np.pi / 2),
                                     0.3, -12.0)
    rep = verify_cracked(tilde, 24)
    assert rep.new_max.kind == "minimum"
    assert rep.complex.degree(rep.new_max.index) == 1
    assert len(rep.cracked_faces) == 1


def test_unperturbed_base_has_no_cracks(sep_complex):
    assert all(f.classification == "regular" for f in sep_complex.faces)


def test_verify_requires_perturbation(separable):
    with pytest.raises(ValueError):
        verify_cracked(separable)


def test_exactly_two_new_points_by_sign_census(crack_field):
    # exhaustive sign analysis of grad over the patch, independent of Newton
    pert = crack_field.perturbations[0]
    n = 500
    loc = (np.arange(n) + 0.5) / n * 2 - 1
    LX, LY = np.meshgrid(loc, loc, indexing="ij")
    lxy = np.stack([LX, LY], axis=-1)
    pts = pert.center + (lxy * pert.scale) @ pert.frame.T
    G = crack_field.gradient(pts) @ pert.frame   # local components

    def mixed(s):
        return ~((s[:-1, :-1] & s[1:, :-1] & s[:-1, 1:] & s[1:, 1:])
                 | (~s[:-1, :-1] & ~s[1:, :-1] & ~s[:-1, 1:] & ~s[1:, 1:]))

    cand = mixed(G[..., 0] > 0) & mixed(G[..., 1] > 0)
    from scipy.ndimage import label
    _, ncl = label(cand)
    assert ncl == 2
