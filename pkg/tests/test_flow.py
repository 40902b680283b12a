import numpy as np
import pytest

from neumann_domains import StopRule, integrate_flow, trace_neumann_lines
from neumann_domains.critical import MAX, MIN, SADDLE, find_critical_points
from neumann_domains.errors import NoConvergence
from neumann_domains.flow import BACKWARD, FORWARD


@pytest.fixture(scope="module")
def sep_points(separable):
    return find_critical_points(separable, 16)


def test_forward_reaches_min(separable, sep_points):
    fl = integrate_flow(separable, [np.pi / 2, np.pi], FORWARD, sep_points)
    end = sep_points[fl.end_index]
    assert end.kind == MIN
    assert np.allclose(end.position, [np.pi, np.pi])
    # the trajectory is the invariant line y = pi
    assert np.max(np.abs(fl.samples[:, 1] - np.pi)) < 1e-6


def test_backward_reaches_saddle(separable, sep_points):
    fl = integrate_flow(separable, [np.pi / 2, np.pi], BACKWARD, sep_points)
    end = sep_points[fl.end_index]
    assert end.kind == SADDLE
    assert np.allclose(end.position, [0.0, np.pi])


def test_interior_trajectory_stays_in_square(separable, sep_points):
    fl = integrate_flow(separable, [np.pi / 2, np.pi / 2], FORWARD,
                        sep_points)
    assert np.allclose(sep_points[fl.end_index].position, [np.pi, np.pi])
    assert np.all(fl.samples > -1e-9)
    assert np.all(fl.samples < np.pi + 1e-9)


def test_start_at_critical_point_rejected(separable, sep_points):
    with pytest.raises(ValueError):
        integrate_flow(separable, [0.0, np.pi], FORWARD, sep_points)


def test_monotone_f_and_total_variation(separable, sep_points):
    fl = integrate_flow(separable, [1.1, 2.3], FORWARD, sep_points)
    vals = separable.value(fl.samples)
    assert np.all(np.diff(vals) <= 1e-12)
    tv = float(np.sum(np.abs(np.diff(vals))))
    assert tv == pytest.approx(abs(vals[0] - vals[-1]), abs=1e-8)


def test_separable_saddle_lines(separable, sep_points):
    saddle = next(p for p in sep_points
                  if p.kind == SADDLE and np.allclose(p.position, [0, np.pi]))
    lines = trace_neumann_lines(separable, saddle, sep_points)
    assert len(lines) == 4
    ends = sorted(sep_points[ln.end_index].kind for ln in lines)
    assert ends == [MAX, MAX, MIN, MIN]
    for ln in lines:
        assert ln.length == pytest.approx(np.pi, abs=1e-6)
        # lines are straight coordinate segments
        dev = min(np.max(np.abs(np.mod(ln.samples[:, 0] + np.pi, 2 * np.pi)
                                - np.pi)),
                  np.max(np.abs(ln.samples[:, 1] - np.pi)))
        assert dev < 1e-6
        assert not ln.ends_at_saddle
    # minima are reached along y = pi, maxima along x = 0
    for ln in lines:
        if sep_points[ln.end_index].kind == MIN:
            assert np.max(np.abs(ln.samples[:, 1] - np.pi)) < 1e-6


def test_anisotropic_same_combinatorics(anisotropic):
    pts = find_critical_points(anisotropic, 16)
    saddle = next(p for p in pts
                  if p.kind == SADDLE and np.allclose(p.position, [0, np.pi]))
    lines = trace_neumann_lines(anisotropic, saddle, pts)
    ends = sorted(pts[ln.end_index].kind for ln in lines)
    assert ends == [MAX, MAX, MIN, MIN]


def test_lambda17_lines_end_at_extrema(l17_complex):
    for ln in l17_complex.lines:
        assert ln.end_index is not None
        assert not ln.ends_at_saddle
        kind = l17_complex.critical_points[ln.end_index].kind
        assert kind in (MIN, MAX)
        # arclength parametrization: uniform spacing up to the final sample
        seg = np.linalg.norm(np.diff(ln.samples, axis=0), axis=1)
        assert np.max(np.abs(seg[:-1] - 1e-3)) < 1e-4


def test_axes17_line_lengths(axes17):
    # straight segments between adjacent critical points: length pi/sqrt(17)
    pts = find_critical_points(axes17, 24)
    saddle = next(p for p in pts if p.kind == SADDLE)
    lines = trace_neumann_lines(axes17, saddle, pts)
    for ln in lines:
        assert ln.length == pytest.approx(np.pi / np.sqrt(17.0), abs=1e-6)


def test_capture_radius_halving(separable, sep_points):
    # the traced geometry is insensitive to the capture radius
    base = StopRule()
    tight = StopRule(capture_radius=base.capture_radius / 2,
                     saddle_capture_radius=base.saddle_capture_radius / 2)
    a = integrate_flow(separable, [1.0, 2.0], FORWARD, sep_points, base)
    b = integrate_flow(separable, [1.0, 2.0], FORWARD, sep_points, tight)
    assert a.end_index == b.end_index
    n = min(len(a.samples), len(b.samples))
    assert np.max(np.abs(a.samples[:n] - b.samples[:n])) < 1e-7


def test_budget_exhaustion(separable, sep_points):
    rule = StopRule(max_length=0.05)
    with pytest.raises(NoConvergence):
        integrate_flow(separable, [1.0, 2.0], FORWARD, sep_points, rule)


def test_symmetry_under_negation(separable, sep_points):
    # forward flow of f from x0 equals backward flow of -f
    neg = separable.negated()
    neg_points = find_critical_points(neg, 16)
    a = integrate_flow(separable, [1.0, 2.0], FORWARD, sep_points)
    b = integrate_flow(neg, [1.0, 2.0], BACKWARD, neg_points)
    n = min(len(a.samples), len(b.samples))
    assert np.max(np.abs(a.samples[:n] - b.samples[:n])) < 1e-8
    assert sep_points[a.end_index].kind == MIN
    assert neg_points[b.end_index].kind == MAX
