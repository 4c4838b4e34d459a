"""
charflow curve

Cubic parametric Bezier segments, parametric Hermite construction, exact
signed area, the area-preserving tangent solve, monotone inversion and overturn
detection.

Points are (x, u) pairs: x horizontal, u vertical.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._errors import (
    CurveError,
    DegenerateAreaError,
    InversionError,
    NonMonotoneError,
    VanishingTangentError,
)

GAUSS_NODES, GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(3)

TANGENT_TOL = 1e-14
AREA_COEF_TOL = 1e-12
INVERT_TOL = 1e-13
INVERT_MAXITER = 100
FOLD_TOL = 1e-13


def cross(a, b):
    """Scalar cross product a0*b1 - a1*b0 (broadcasts over leading axes)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _bernstein(t):
    s = 1.0 - t
    return np.stack([s**3, 3.0 * s**2 * t, 3.0 * s * t**2, t**3], axis=-1)


def _bernstein_prime(t):
    s = 1.0 - t
    return np.stack([-3.0 * s**2, 3.0 * s**2 - 6.0 * s * t,
                     6.0 * s * t - 3.0 * t**2, 3.0 * t**2], axis=-1)


def _check_param(t):
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise ValueError(f'Bezier parameter must lie in [0, 1], got {t}')
    return t


@dataclass(frozen=True)
class BezierSegment:
    """
    One cubic interpolant B(t) = A(1-t)^3 + 3 C1 (1-t)^2 t + 3 C2 (1-t) t^2 + D t^3

    Inner control points are reconstructed from the tangent data, so
    C1 = A + r1/3 alpha and C2 = D - r2/3 beta hold by construction.
    """
    A: tuple
    D: tuple
    alpha: tuple
    beta: tuple
    r1: float
    r2: float

    @cached_property
    def control_points(self):
        A = np.asarray(self.A, dtype=np.float64)
        D = np.asarray(self.D, dtype=np.float64)
        C1 = A + self.r1 / 3.0 * np.asarray(self.alpha, dtype=np.float64)
        C2 = D - self.r2 / 3.0 * np.asarray(self.beta, dtype=np.float64)
        return np.stack([A, C1, C2, D])

    @property
    def C1(self):
        return self.control_points[1]

    @property
    def C2(self):
        return self.control_points[2]

    def point(self, t):
        t = _check_param(t)
        if t.ndim == 0 and t == 0.0:
            return self.control_points[0].copy()
        if t.ndim == 0 and t == 1.0:
            return self.control_points[3].copy()
        return _bernstein(t) @ self.control_points

    def derivative(self, t):
        t = _check_param(t)
        return _bernstein_prime(t) @ self.control_points

    @property
    def area(self):
        return parametric_area(self)

    def min_x_slope(self):
        return min_x_slope(self)


def eval_point(seg, t):
    """Bernstein evaluation; exact at both endpoints."""
    return seg.point(t)


def eval_derivative(seg, t):
    """B'(t); B'(0) = r1 alpha and B'(1) = r2 beta."""
    return seg.derivative(t)


def hermite_magnitudes(p0, p1, tan0, tan1, axis=0):
    """
    Parametric Hermite tangent magnitudes r1 = dp/tan0, r2 = dp/tan1

    `axis` selects the coordinate the Hermite is taken against: 0 gives the
    graph Hermite in x, 1 the Hermite in u used for vertical connectors.
    Works on single points or on stacked (n, 2) arrays.
    """
    p0, p1, tan0, tan1 = (np.asarray(a, dtype=np.float64) for a in (p0, p1, tan0, tan1))
    span = p1[..., axis] - p0[..., axis]
    c0 = tan0[..., axis]
    c1 = tan1[..., axis]
    bad = ((np.abs(c0) <= TANGENT_TOL * np.hypot(tan0[..., 0], tan0[..., 1]))
           | (np.abs(c1) <= TANGENT_TOL * np.hypot(tan1[..., 0], tan1[..., 1])))
    if np.any(bad):
        index = int(np.flatnonzero(np.atleast_1d(bad))[0])
        coord = 'horizontal' if axis == 0 else 'vertical'
        raise VanishingTangentError(
            f'{coord} tangent component vanishes on interval {index}; '
            'refine the grid', index)
    return span / c0, span / c1


def hermite_segment(p0, p1, tan0, tan1, axis=0):
    """
    Parametric cubic Hermite through p0, p1 with tangent directions tan0, tan1
    """
    r1, r2 = hermite_magnitudes(p0, p1, tan0, tan1, axis=axis)
    return BezierSegment(_pair(p0), _pair(p1), _pair(tan0), _pair(tan1),
                         float(r1), float(r2))


def _pair(p):
    p = np.asarray(p, dtype=np.float64)
    return (float(p[0]), float(p[1]))


def _gauss_area(P, ta=0.0, tb=1.0):
    """Signed area of B2 dB1 on [ta, tb] for control points P (..., 4, 2)."""
    ta = np.asarray(ta, dtype=np.float64)
    tb = np.asarray(tb, dtype=np.float64)
    half = 0.5 * (tb - ta)
    total = 0.0
    for node, weight in zip(GAUSS_NODES, GAUSS_WEIGHTS):
        t = ta + half * (node + 1.0)
        b = _bernstein(t)
        db = _bernstein_prime(t)
        u = np.einsum('...k,...k->...', b, P[..., 1])
        dx = np.einsum('...k,...k->...', db, P[..., 0])
        total = total + weight * u * dx
    return half * total


def parametric_area(seg):
    """
    Exact signed area under the segment, 3-point Gauss-Legendre on B2 B1'
    """
    return float(_gauss_area(seg.control_points))


def closed_form_area(seg):
    """Closed-form signed area, used as a cross-check of the quadrature."""
    A = np.asarray(seg.A, dtype=np.float64)
    D = np.asarray(seg.D, dtype=np.float64) - A
    alpha = np.asarray(seg.alpha, dtype=np.float64)
    beta = np.asarray(seg.beta, dtype=np.float64)
    r1, r2 = seg.r1, seg.r2
    return float(r1 * r2 / 60.0 * cross(alpha, beta)
                 + r1 / 10.0 * cross(D, alpha)
                 + r2 / 10.0 * cross(beta, D)
                 + 0.5 * D[0] * D[1]
                 + A[1] * D[0])


def area_preserving_r2(p0, p1, tan0, tan1, r1, target_area, fallback=None):
    """
    Vectorised r2 solve of the area relation; returns (r2, degenerate, consistent)

    Where the r2 coefficient is degenerate the Hermite value (or `fallback`)
    is returned and `consistent` tells whether it already meets the target.
    """
    p0, p1, tan0, tan1 = (np.asarray(a, dtype=np.float64) for a in (p0, p1, tan0, tan1))
    r1 = np.asarray(r1, dtype=np.float64)
    target_area = np.asarray(target_area, dtype=np.float64)
    D = p1 - p0
    coef = r1 / 60.0 * cross(tan0, tan1) + cross(tan1, D) / 10.0
    const = r1 / 10.0 * cross(D, tan0) + 0.5 * D[..., 0] * D[..., 1] + p0[..., 1] * D[..., 0]
    norm_d = np.hypot(D[..., 0], D[..., 1])
    norm_a = np.hypot(tan0[..., 0], tan0[..., 1])
    norm_b = np.hypot(tan1[..., 0], tan1[..., 1])
    scale = np.maximum(norm_d * norm_b, np.abs(r1) * norm_a * norm_b)
    degenerate = np.abs(coef) <= AREA_COEF_TOL * np.maximum(scale, np.finfo(float).tiny)
    with np.errstate(divide='ignore', invalid='ignore'):
        hermite = D[..., 0] / tan1[..., 0] if fallback is None else np.asarray(fallback, dtype=np.float64)
        solved = (target_area - const) / coef
    r2 = np.where(degenerate, hermite, solved)
    area_scale = np.maximum(norm_d**2, np.abs(p0[..., 1] * D[..., 0]))
    residual = np.abs(const + coef * hermite - target_area)
    consistent = ~degenerate | (residual <= 1e-12 * np.maximum(area_scale, 1e-300))
    return r2, degenerate, consistent


def solve_area_preserving_r2(p0, p1, tan0, tan1, r1, target_area):
    """
    Solve for r2 so the segment's signed area equals `target_area`

    Raises DegenerateAreaError when the r2 coefficient vanishes and the
    Hermite segment does not already carry the requested area.
    """
    r2, degenerate, consistent = area_preserving_r2(p0, p1, tan0, tan1, r1, target_area)
    if degenerate and not consistent:
        raise DegenerateAreaError(
            'area relation is degenerate in r2; fall back to the Hermite segment')
    if degenerate:
        logging.debug('degenerate area solve, using Hermite r2=%s', r2)
    return float(r2)


def _slope_coefficients(P):
    """x'(t) = c0 + c1 t + c2 t^2 for control points P (..., 4, 2)."""
    q0 = P[..., 1, 0] - P[..., 0, 0]
    q1 = P[..., 2, 0] - P[..., 1, 0]
    q2 = P[..., 3, 0] - P[..., 2, 0]
    return 3.0 * q0, 6.0 * (q1 - q0), 3.0 * (q0 - 2.0 * q1 + q2)


def _min_slope(P, ta=0.0, tb=1.0):
    c0, c1, c2 = _slope_coefficients(P)
    ta = np.asarray(ta, dtype=np.float64)
    tb = np.asarray(tb, dtype=np.float64)

    def slope(t):
        return c0 + t * (c1 + t * c2)

    best_t = ta * np.ones_like(c0)
    best = slope(best_t)
    end = slope(tb * np.ones_like(c0))
    take = end < best
    best_t = np.where(take, tb, best_t)
    best = np.where(take, end, best)
    with np.errstate(divide='ignore', invalid='ignore'):
        crit = np.where(c2 > 0.0, -c1 / (2.0 * c2), np.nan)
    inside = (c2 > 0.0) & (crit > ta) & (crit < tb)
    crit_val = slope(np.where(inside, crit, ta))
    take = inside & (crit_val < best)
    best_t = np.where(take, crit, best_t)
    best = np.where(take, crit_val, best)
    return best_t, best


def min_x_slope(seg):
    """
    Minimiser of B1'(t) on [0, 1]; a negative slope means the segment overturns
    """
    t_min, slope = _min_slope(seg.control_points)
    return float(t_min), float(slope)


def _x_critical_points(P):
    c0, c1, c2 = (float(c) for c in _slope_coefficients(P))
    if c2 == 0.0:
        return [-c0 / c1] if c1 != 0.0 else []
    roots = np.roots([c2, c1, c0])
    return [float(r.real) for r in roots if abs(r.imag) <= 1e-12 * (1.0 + abs(r.real))]


def x_extrema(seg, ta=0.0, tb=1.0):
    """(min, max) of B1 on the parameter window [ta, tb]."""
    return _x_extrema(seg.control_points, ta, tb)


def _x_extrema(P, ta, tb):
    ts = [ta, tb] + [t for t in _x_critical_points(P) if ta < t < tb]
    xs = _bernstein(np.asarray(ts)) @ P[:, 0]
    return float(xs.min()), float(xs.max())


def _x_roots(P, xq, ta, tb):
    """Parameters in [ta, tb] where B1(t) = xq, ascending."""
    x0, x1, x2, x3 = P[:, 0] - xq
    coeffs = [-x0 + 3.0 * x1 - 3.0 * x2 + x3,
              3.0 * x0 - 6.0 * x1 + 3.0 * x2,
              -3.0 * x0 + 3.0 * x1,
              x0]
    scale = max(abs(c) for c in coeffs[:3]) if any(coeffs[:3]) else 0.0
    while coeffs and abs(coeffs[0]) <= 1e-14 * scale:
        coeffs = coeffs[1:]
    if len(coeffs) <= 1:
        return [ta] if coeffs and coeffs[0] == 0.0 else []
    found = []
    slack = 1e-9
    for root in np.roots(coeffs):
        if abs(root.imag) > 1e-7:
            continue
        t = _polish_root(P, xq, float(np.clip(root.real, ta, tb)), ta, tb)
        if ta - slack <= root.real <= tb + slack and t is not None:
            found.append(t)
    return sorted(found)


def _polish_root(P, xq, t, ta, tb):
    for _ in range(4):
        b = _bernstein(t) @ P[:, 0] - xq
        db = _bernstein_prime(t) @ P[:, 0]
        if db == 0.0:
            break
        t_new = min(max(t - b / db, ta), tb)
        if t_new == t:
            break
        t = t_new
    return t


def solve_x(P, xq, ta=0.0, tb=1.0, xtol=None):
    """
    Safeguarded Newton for B1(t) = xq on an increasing window [ta, tb]

    Falls back to bisection whenever the Newton iterate leaves the bracket.
    """
    xtol = INVERT_TOL * (1.0 + abs(xq)) if xtol is None else xtol
    xs = P[:, 0]

    def f(t):
        return float(_bernstein(t) @ xs) - xq

    lo, hi = ta, tb
    f_lo, f_hi = f(lo), f(hi)
    if abs(f_lo) <= xtol:
        return lo
    if abs(f_hi) <= xtol:
        return hi
    if f_lo > 0.0 or f_hi < 0.0:
        raise InversionError(f'x={xq!r} is not bracketed on [{ta}, {tb}]')
    t = lo + (hi - lo) * (-f_lo) / (f_hi - f_lo)
    for _ in range(INVERT_MAXITER):
        value = f(t)
        if abs(value) <= xtol:
            return t
        if value < 0.0:
            lo = t
        else:
            hi = t
        slope = float(_bernstein_prime(t) @ xs)
        t_new = t - value / slope if slope > 0.0 else -1.0
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        t = t_new
    raise InversionError(f'no convergence inverting x={xq!r}')


class CurveChain:
    """
    Ordered piecewise cubic curve: one smooth branch of the solution

    Stored as stacked arrays; BezierSegment objects are built on demand.
    Positions along the chain are given by S in [0, n_segments], segment
    k = floor(S) and local parameter t = S - k.
    """

    def __init__(self, points, tan0, tan1, r1, r2, node_params, time_stamp=0.0,
                 node_index=None):
        points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        self.points = points
        self.node_index = None if node_index is None else np.asarray(node_index, dtype=int)
        self.tan0 = np.asarray(tan0, dtype=np.float64).reshape(-1, 2)
        self.tan1 = np.asarray(tan1, dtype=np.float64).reshape(-1, 2)
        self.r1 = np.asarray(r1, dtype=np.float64).reshape(-1)
        self.r2 = np.asarray(r2, dtype=np.float64).reshape(-1)
        self.node_params = np.asarray(node_params, dtype=np.float64).reshape(len(points), -1)
        self.time_stamp = float(time_stamp)
        n = len(points) - 1
        if not (len(self.tan0) == len(self.tan1) == len(self.r1) == len(self.r2) == max(n, 0)):
            raise CurveError('segment arrays do not match the knot count')
        if n > 0 and not _lex_increasing(self.node_params):
            raise CurveError('node parameters must be strictly increasing')
        A = points[:-1]
        D = points[1:]
        self.control = np.stack([
            A,
            A + (self.r1 / 3.0)[:, None] * self.tan0,
            D - (self.r2 / 3.0)[:, None] * self.tan1,
            D,
        ], axis=1) if n > 0 else np.empty((0, 4, 2))

    @classmethod
    def from_control(cls, control, node_params, time_stamp=0.0, node_index=None):
        """Chain with the given (n, 4, 2) control polygons and unit magnitudes."""
        control = np.asarray(control, dtype=np.float64)
        points = np.concatenate([control[:, 0], control[-1:, 3]])
        tan0 = 3.0 * (control[:, 1] - control[:, 0])
        tan1 = 3.0 * (control[:, 3] - control[:, 2])
        ones = np.ones(len(control))
        return cls(points, tan0, tan1, ones, ones, node_params, time_stamp, node_index)

    def __len__(self):
        return len(self.control)

    def fold_intervals(self):
        """
        Maximal windows [Sa, Sb] of chain position on which x decreases
        """
        n = len(self)
        if n == 0:
            return []
        _, s_min = self.min_slopes
        folds = []
        k = 0
        while k < n:
            if s_min[k] >= 0.0:
                k += 1
                continue
            start = k
            while k < n and s_min[k] < 0.0:
                k += 1
            Sa = self.monotone_extent('left', start=start)
            Sb = self.monotone_extent('right', start=k)
            if Sb > Sa and self._fold_width(Sa, Sb) > 0.0:
                folds.append((Sa, Sb))
        return _merge_windows(folds)

    def _fold_width(self, Sa, Sb):
        """How far x falls back across [Sa, Sb]; round-off folds count as zero."""
        x_a = float(self.point_at(Sa)[0])
        x_b = float(self.point_at(Sb)[0])
        width = x_a - x_b
        return width if width > FOLD_TOL * max(1.0, abs(x_a), abs(x_b)) else 0.0

    @property
    def n_segments(self):
        return len(self.control)

    def segment(self, k):
        return BezierSegment(_pair(self.points[k]), _pair(self.points[k + 1]),
                             _pair(self.tan0[k]), _pair(self.tan1[k]),
                             float(self.r1[k]), float(self.r2[k]))

    @cached_property
    def segments(self):
        return tuple(self.segment(k) for k in range(len(self)))

    @cached_property
    def areas(self):
        return _gauss_area(self.control) if len(self) else np.empty(0)

    @cached_property
    def min_slopes(self):
        return _min_slope(self.control) if len(self) else (np.empty(0), np.empty(0))

    @cached_property
    def x_bounds(self):
        """Per-segment (min, max) of x over the full parameter range."""
        if not len(self):
            return np.empty(0), np.empty(0)
        xs = self.control[:, :, 0]
        lo = np.minimum(xs[:, 0], xs[:, 3])
        hi = np.maximum(xs[:, 0], xs[:, 3])
        t_min, s_min = self.min_slopes
        # an interior extremum exists only where the slope changes sign
        s_max = -_min_slope(-self.control)[1]
        curved = (s_min < 0.0) & (s_max > 0.0)
        for k in np.flatnonzero(curved):
            lo[k], hi[k] = _x_extrema(self.control[k], 0.0, 1.0)
        return lo, hi

    def locate(self, S):
        n = len(self)
        if n == 0:
            raise CurveError('empty chain')
        if S < 0.0 or S > n:
            raise ValueError(f'chain position {S} outside [0, {n}]')
        k = min(int(np.floor(S)), n - 1)
        return k, S - k

    def point_at(self, S):
        k, t = self.locate(S)
        return _bernstein(t) @ self.control[k]

    def derivative_at(self, S):
        k, t = self.locate(S)
        return _bernstein_prime(t) @ self.control[k]

    def area_between(self, S1, S2):
        """Signed integral of u dx along the chain from S1 to S2."""
        if S2 < S1:
            return -self.area_between(S2, S1)
        k1, t1 = self.locate(S1)
        k2, t2 = self.locate(S2)
        if k1 == k2:
            return float(_gauss_area(self.control[k1], t1, t2))
        total = float(_gauss_area(self.control[k1], t1, 1.0))
        total += float(np.sum(self.areas[k1 + 1:k2]))
        total += float(_gauss_area(self.control[k2], 0.0, t2))
        return total

    def x_range(self, lo=0.0, hi=None):
        """(min, max) of x over the window [lo, hi] of chain positions."""
        hi = float(len(self)) if hi is None else hi
        k1, t1 = self.locate(lo)
        k2, t2 = self.locate(hi)
        if k1 == k2:
            return _x_extrema(self.control[k1], t1, t2)
        a = _x_extrema(self.control[k1], t1, 1.0)
        b = _x_extrema(self.control[k2], 0.0, t2)
        mins = [a[0], b[0]]
        maxs = [a[1], b[1]]
        if k2 > k1 + 1:
            x_lo, x_hi = self.x_bounds
            mins.append(float(np.min(x_lo[k1 + 1:k2])))
            maxs.append(float(np.max(x_hi[k1 + 1:k2])))
        return min(mins), max(maxs)

    def crossings(self, xq, lo=0.0, hi=None, last=False):
        """
        First (or last) chain position in [lo, hi] where x equals `xq`

        Returns None when the level is not reached inside the window.
        """
        hi = float(len(self)) if hi is None else hi
        k1, t1 = self.locate(lo)
        k2, t2 = self.locate(hi)
        x_lo, x_hi = self.x_bounds
        slack = 1e-12 * (1.0 + abs(xq))
        order = range(k2, k1 - 1, -1) if last else range(k1, k2 + 1)
        for k in order:
            if not (x_lo[k] - slack <= xq <= x_hi[k] + slack):
                continue
            ta = t1 if k == k1 else 0.0
            tb = t2 if k == k2 else 1.0
            roots = _x_roots(self.control[k], xq, ta, tb)
            if roots:
                return k + (roots[-1] if last else roots[0])
        return None

    def monotone_extent(self, side='left', start=None):
        """
        Chain position where x stops increasing, scanning from one end

        side='left' scans forward from `start` (default 0) and returns the
        first fold; side='right' scans backward from `start` (default the
        chain end).
        """
        n = len(self)
        t_min, s_min = self.min_slopes
        if side == 'left':
            k0 = 0 if start is None else min(int(np.floor(start)), n - 1)
            bad = np.flatnonzero(s_min[k0:] < 0.0)
            if not len(bad):
                return float(n)
            k = k0 + int(bad[0])
            roots = [t for t in _x_critical_points(self.control[k]) if 0.0 <= t <= 1.0]
            c0 = _slope_coefficients(self.control[k])[0]
            return float(k + (min(roots) if roots and c0 >= 0.0 else 0.0))
        k0 = n - 1 if start is None else min(int(np.ceil(start)) - 1, n - 1)
        bad = np.flatnonzero(s_min[:k0 + 1] < 0.0)
        if not len(bad):
            return 0.0
        k = int(bad[-1])
        roots = [t for t in _x_critical_points(self.control[k]) if 0.0 <= t <= 1.0]
        c0, c1, c2 = _slope_coefficients(self.control[k])
        end_slope = c0 + c1 + c2
        return float(k + (max(roots) if roots and end_slope >= 0.0 else 1.0))

    def increasing_run(self, S):
        """
        Maximal window (lo, hi) of chain positions around S on which x never decreases
        """
        n = len(self)
        if n == 0:
            return 0.0, 0.0
        k, t = self.locate(S)
        _, s_min = self.min_slopes
        bad = np.flatnonzero(s_min < 0.0)
        parts = _increasing_parts(self.control[k]) if s_min[k] < 0.0 else [(0.0, 1.0)]
        own = [p for p in parts if p[0] - 1e-12 <= t <= p[1] + 1e-12]
        if not own:
            raise NonMonotoneError(f'chain decreases at position {S!r}')
        a, b = own[0]
        hi, j = k + b, k
        while hi == j + 1 and hi < n:
            later = bad[bad > j]
            if not len(later):
                hi = float(n)
                break
            j = int(later[0])
            first = _increasing_parts(self.control[j])
            hi = j + first[0][1] if first and first[0][0] == 0.0 else float(j)
        lo, j = k + a, k
        while lo == j and lo > 0:
            earlier = bad[bad < j]
            if not len(earlier):
                lo = 0.0
                break
            j = int(earlier[-1])
            last = _increasing_parts(self.control[j])
            lo = j + last[-1][0] if last and last[-1][1] == 1.0 else float(j + 1)
        return float(lo), float(hi)


def _increasing_parts(P):
    """Sub-intervals of [0, 1] on which x'(t) >= 0, adjacent ones joined."""
    c0, c1, c2 = (float(c) for c in _slope_coefficients(P))
    cuts = [0.0] + sorted(r for r in _x_critical_points(P) if 0.0 < r < 1.0) + [1.0]
    parts = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        m = 0.5 * (a + b)
        if c0 + m * (c1 + m * c2) < 0.0:
            continue
        if parts and parts[-1][1] == a:
            parts[-1] = (parts[-1][0], b)
        else:
            parts.append((a, b))
    return parts


def _lex_increasing(params):
    if len(params) < 2:
        return True
    d0 = np.diff(params[:, 0])
    if params.shape[1] == 1:
        return bool(np.all(d0 > 0.0))
    d1 = np.diff(params[:, 1])
    return bool(np.all((d0 > 0.0) | ((d0 == 0.0) & (d1 > 0.0))))


def invert_x(chain, xq, lo=None, hi=None, side='left'):
    """
    Height of the chain at abscissa `xq`: (segment index, parameter, u)

    Only the window [lo, hi] of chain positions is searched; side='left'
    takes the first crossing, side='right' the last. The window must be
    x-monotone where the crossing lies.
    """
    n = len(chain)
    if n == 0:
        pts = chain.points
        if len(pts) == 1 and abs(pts[0, 0] - xq) <= INVERT_TOL * (1.0 + abs(xq)):
            return 0, 0.0, float(pts[0, 1])
        raise InversionError(f'x={xq!r} is outside an empty chain')
    lo = 0.0 if lo is None else lo
    hi = float(n) if hi is None else hi
    S = chain.crossings(xq, lo, hi, last=(side == 'right'))
    if S is None:
        x_min, x_max = chain.x_range(lo, hi)
        raise InversionError(
            f'x={xq!r} is outside the chain range [{x_min!r}, {x_max!r}]')
    k, t = chain.locate(S)
    ta = max(lo - k, 0.0)
    tb = min(hi - k, 1.0)
    P = chain.control[k]
    _, slope = _min_slope(P, ta, tb)
    if slope < 0.0:
        # only the piece around the crossing needs to be increasing
        c0, c1, c2 = _slope_coefficients(P)
        if c0 + t * (c1 + t * c2) < 0.0:
            raise NonMonotoneError(f'segment {k} is overturned at x={xq!r}')
        crit = sorted(r for r in _x_critical_points(P) if ta < r < tb)
        for r in crit:
            if r < t:
                ta = r
            elif r > t:
                tb = r
                break
    t = solve_x(P, xq, ta, tb)
    u = float(_bernstein(t) @ P[:, 1])
    return k, t, u


def _merge_windows(windows):
    merged = []
    for lo, hi in sorted(windows):
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
        else:
            merged.append((lo, hi))
    return merged
