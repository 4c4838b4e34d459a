"""
Tests for Bezier segments, area relations and chain queries
"""

import numpy as np
import pytest

from charflow.lib._curve import (
    BezierSegment,
    CurveChain,
    closed_form_area,
    hermite_magnitudes,
    hermite_segment,
    invert_x,
    min_x_slope,
    parametric_area,
    solve_area_preserving_r2,
    x_extrema,
)
from charflow.lib._converge import fit_order
from charflow.lib._errors import (
    DegenerateAreaError,
    InversionError,
    NonMonotoneError,
    VanishingTangentError,
)

# x goes 0 -> 1 but runs backwards for 0.5 - sqrt(5)/10 < t < 0.5 + sqrt(5)/10
S_CURVE = [[(0.0, 0.0), (2.0, 0.3), (-1.0, 0.7), (1.0, 1.0)]]
LINE = [[(0.0, 0.0), (2.0 / 3.0, 4.0 / 3.0), (4.0 / 3.0, 8.0 / 3.0), (2.0, 4.0)]]
LABELS = [[0.0, 0.0], [1.0, 0.0]]


def test_quadrature_matches_closed_form_area():
    """Three-point Gauss-Legendre is exact for the degree-5 area integrand."""
    rng = np.random.default_rng(7)
    for _ in range(1000):
        A, D, alpha, beta = rng.uniform(-1.0, 1.0, size=(4, 2))
        r1, r2 = rng.uniform(0.2, 2.0, size=2)
        seg = BezierSegment(tuple(A), tuple(D), tuple(alpha), tuple(beta), r1, r2)
        exact = closed_form_area(seg)
        assert parametric_area(seg) == pytest.approx(exact, rel=1e-13, abs=1e-13)


def test_segment_endpoints_and_tangents():
    seg = hermite_segment((0.0, 1.0), (2.0, 3.0), (1.0, 0.5), (1.0, 2.0))
    np.testing.assert_array_equal(seg.point(0.0), [0.0, 1.0])
    np.testing.assert_array_equal(seg.point(1.0), [2.0, 3.0])
    np.testing.assert_allclose(seg.derivative(0.0), [2.0, 1.0], rtol=1e-15)
    np.testing.assert_allclose(seg.derivative(1.0), [2.0, 4.0], rtol=1e-15)
    with pytest.raises(ValueError):
        seg.point(1.5)


def test_vanishing_tangent():
    with pytest.raises(VanishingTangentError):
        hermite_magnitudes((0.0, 0.0), (1.0, 1.0), (0.0, 1.0), (1.0, 1.0))


def test_area_preserving_r2_hits_target():
    p0, p1 = (0.0, 0.0), (1.0, 0.5)
    tan0, tan1 = (1.0, 1.0), (1.0, 0.0)
    r1, _ = hermite_magnitudes(p0, p1, tan0, tan1)
    r2 = solve_area_preserving_r2(p0, p1, tan0, tan1, r1, 0.4)
    seg = BezierSegment(p0, p1, tan0, tan1, float(r1), r2)
    assert parametric_area(seg) == pytest.approx(0.4, abs=1e-14)


def test_degenerate_area_relation():
    """A straight segment has no freedom in r2: only its own area is reachable."""
    p0, p1, tan = (0.0, 0.0), (1.0, 1.0), (1.0, 1.0)
    assert solve_area_preserving_r2(p0, p1, tan, tan, 1.0, 0.5) == pytest.approx(1.0)
    with pytest.raises(DegenerateAreaError):
        solve_area_preserving_r2(p0, p1, tan, tan, 1.0, 0.7)


def test_area_preserving_correction_decays_cubically():
    """r2 - r2_hermite shrinks like h^3 on smooth data."""
    x0 = 1.0
    hs = 0.4 * 0.5 ** np.arange(5)
    diffs = []
    for h in hs:
        x1 = x0 + h
        p0, p1 = (x0, np.sin(x0)), (x1, np.sin(x1))
        tan0, tan1 = (1.0, np.cos(x0)), (1.0, np.cos(x1))
        r1, r2_hermite = hermite_magnitudes(p0, p1, tan0, tan1)
        target = np.cos(x0) - np.cos(x1)
        r2 = solve_area_preserving_r2(p0, p1, tan0, tan1, r1, target)
        diffs.append(abs(r2 - float(r2_hermite)))
    order = fit_order(hs, diffs)
    assert 2.5 <= order <= 3.5, f'r2 correction decays with order {order}'


def test_overturned_segment():
    chain = CurveChain.from_control(S_CURVE, LABELS)
    t_min, slope = min_x_slope(chain.segment(0))
    assert t_min == pytest.approx(0.5)
    assert slope == pytest.approx(-1.5)
    (Sa, Sb), = chain.fold_intervals()
    assert Sa == pytest.approx(0.5 - np.sqrt(5.0) / 10.0, abs=1e-12)
    assert Sb == pytest.approx(0.5 + np.sqrt(5.0) / 10.0, abs=1e-12)


def test_increasing_run():
    chain = CurveChain.from_control(S_CURVE, LABELS)
    lo, hi = chain.increasing_run(0.1)
    assert lo == 0.0
    assert hi == pytest.approx(0.5 - np.sqrt(5.0) / 10.0, abs=1e-12)
    lo, hi = chain.increasing_run(0.9)
    assert lo == pytest.approx(0.5 + np.sqrt(5.0) / 10.0, abs=1e-12)
    assert hi == 1.0
    with pytest.raises(NonMonotoneError):
        chain.increasing_run(0.5)


def test_monotone_chain_has_no_folds():
    chain = CurveChain.from_control(LINE, LABELS)
    assert chain.fold_intervals() == []
    assert chain.increasing_run(0.3) == (0.0, 1.0)


def test_invert_x():
    chain = CurveChain.from_control(LINE, LABELS)
    k, t, u = invert_x(chain, 0.5)
    assert k == 0
    assert t == pytest.approx(0.25, abs=1e-12)
    assert u == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InversionError):
        invert_x(chain, 3.0)


def test_area_between():
    chain = CurveChain.from_control(LINE, LABELS)
    assert chain.area_between(0.0, 1.0) == pytest.approx(4.0, abs=1e-14)
    assert chain.area_between(0.0, 0.5) == pytest.approx(1.0, abs=1e-14)
    assert chain.area_between(0.5, 0.0) == pytest.approx(-1.0, abs=1e-14)


def test_x_extrema_of_overturned_segment():
    seg = BezierSegment((0.0, 0.0), (1.0, 1.0), (2.0, 0.3), (2.0, 0.3), 3.0, 3.0)
    np.testing.assert_allclose(seg.control_points, S_CURVE[0])
    assert x_extrema(seg) == pytest.approx((0.0, 1.0))
    fold = np.sqrt(5.0) / 10.0
    assert x_extrema(seg, 0.2, 0.8) == pytest.approx((0.5 - fold, 0.5 + fold), abs=1e-14)
    assert x_extrema(seg, 0.0, 0.2) == pytest.approx((0.0, 0.68), abs=1e-14)
