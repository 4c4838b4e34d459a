"""
charflow projection

Equal-area cuts of overturned chains, the modified equal-area principle for
shock birth under a source, and the source bias of the naive projection.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._characteristics import advance, build_chain, seed_nodes
from ._curve import GAUSS_NODES, GAUSS_WEIGHTS, CurveChain, _bernstein, _bernstein_prime
from ._errors import (
    ChainMismatchError,
    EqualAreaError,
    InversionError,
    NoOverturnError,
)

NEWTON_MAXITER = 30
RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class EqualAreaResult:
    """
    One equal-area cut: chain positions S1 < S2 with x(S1) = x(S2) = x_star
    """
    S1: float
    S2: float
    x_star: float
    u_left: float
    u_right: float
    lobe_residual: float
    window: tuple = None

    @property
    def s1(self):
        k = min(int(np.floor(self.S1)), max(int(np.ceil(self.S1)) - 1, 0))
        return k, self.S1 - k

    @property
    def s2(self):
        k = min(int(np.floor(self.S2)), max(int(np.ceil(self.S2)) - 1, 0))
        return k, self.S2 - k


def _x_at(chain, S):
    return float(chain.point_at(S)[0])


class _Cut:
    """Equal-area system on one window: increasing [L, Sa], folds, increasing [Sb, R]."""

    def __init__(self, chain, L, Sa, Sb, R):
        self.chain = chain
        self.L, self.Sa, self.Sb, self.R = L, Sa, Sb, R
        self.lo = max(_x_at(chain, L), _x_at(chain, Sb))
        self.hi = min(_x_at(chain, Sa), _x_at(chain, R))
        self.scale = max(1.0, abs(self.lo), abs(self.hi))

    def left(self, X):
        S = self.chain.crossings(X, self.L, self.Sa, last=True)
        if S is None:
            S = self.L if X <= _x_at(self.chain, self.L) else self.Sa
        return S

    def right(self, X):
        S = self.chain.crossings(X, self.Sb, self.R, last=False)
        if S is None:
            S = self.R if X >= _x_at(self.chain, self.R) else self.Sb
        return S

    def phi(self, X):
        return self.chain.area_between(self.left(X), self.right(X))

    def solve_nested(self):
        if self.lo > self.hi:
            direction = 'right' if _x_at(self.chain, self.R) < _x_at(self.chain, self.Sa) else 'left'
            raise EqualAreaError(
                f'cut window [{self.L:g}, {self.R:g}] admits no level', direction)
        f_lo, f_hi = self.phi(self.lo), self.phi(self.hi)
        if f_hi > 0.0 and f_lo > 0.0:
            raise EqualAreaError(
                f'lobe area stays positive up to x={self.hi!r}', 'right')
        if f_lo < 0.0 and f_hi < 0.0:
            raise EqualAreaError(
                f'lobe area stays negative down to x={self.lo!r}', 'left')
        if f_lo == 0.0:
            return self.lo
        if f_hi == 0.0:
            return self.hi
        return brentq(self.phi, self.lo, self.hi, xtol=1e-14 * self.scale,
                      rtol=4.0 * np.finfo(float).eps, maxiter=200)

    def solve_newton(self, S1, S2):
        """Damped Newton on (x(S1) - x(S2), A(S1, S2)); None when it stalls."""
        chain = self.chain
        if not (self.L <= S1 <= self.Sa and self.Sb <= S2 <= self.R):
            return None

        def residual(S1, S2):
            return np.array([_x_at(chain, S1) - _x_at(chain, S2), chain.area_between(S1, S2)])

        res = residual(S1, S2)
        for _ in range(NEWTON_MAXITER):
            if (abs(res[0]) <= RESIDUAL_TOL * self.scale
                    and abs(res[1]) <= RESIDUAL_TOL * self.scale):
                return 0.5 * (_x_at(chain, S1) + _x_at(chain, S2)), S1, S2
            (x1, u1), (x2, u2) = chain.point_at(S1), chain.point_at(S2)
            d1, d2 = chain.derivative_at(S1)[0], chain.derivative_at(S2)[0]
            det = d1 * d2 * (u2 - u1)
            if not u1 > u2 or abs(det) <= 1e-300:
                return None
            jac = np.array([[d1, -d2], [-u1 * d1, u2 * d2]])
            delta = np.linalg.solve(jac, -res)
            lam = 1.0
            while lam > 1e-4:
                T1 = min(max(S1 + lam * delta[0], self.L), self.Sa)
                T2 = min(max(S2 + lam * delta[1], self.Sb), self.R)
                trial = residual(T1, T2)
                if np.linalg.norm(trial) < np.linalg.norm(res):
                    S1, S2, res = T1, T2, trial
                    break
                lam *= 0.5
            else:
                return None
        return None

    def result(self, X, S1=None, S2=None):
        S1 = self.left(X) if S1 is None else S1
        S2 = self.right(X) if S2 is None else S2
        if not S2 > S1:
            raise EqualAreaError(f'degenerate cut at x={X!r}')
        u1 = float(self.chain.point_at(S1)[1])
        u2 = float(self.chain.point_at(S2)[1])
        if u1 < u2:
            raise EqualAreaError(
                f'cut at x={X!r} is not compressive (u_left={u1!r} < u_right={u2!r})')
        return EqualAreaResult(S1, S2, float(X), u1, u2,
                               self.chain.area_between(S1, S2), (self.L, self.R))


def fold_window(chain, folds, first, last):
    """Window (L, Sa, Sb, R) enclosing folds[first..last]."""
    L = folds[first - 1][1] if first > 0 else 0.0
    R = folds[last + 1][0] if last + 1 < len(folds) else float(len(chain))
    return L, folds[first][0], folds[last][1], R


def solve_window(chain, window, guess=None):
    """Equal-area cut inside `window`; Newton from `guess`, bracketed otherwise."""
    cut = _Cut(chain, *window)
    if guess is not None:
        found = cut.solve_newton(*guess)
        if found is not None:
            X, S1, S2 = found
            return cut.result(X, S1, S2)
        logging.debug('Newton stalled near S=%s, falling back to bracketing', guess)
    return cut.result(cut.solve_nested())


def find_equal_area(chain, overturn_hint=None, guess=None):
    """
    Equal-area cut of the fold nearest to `overturn_hint`

    `overturn_hint` is a chain position (or a (segment, t) pair) inside or
    near the fold. Neighbouring folds whose lobes interact are merged into
    one cut.
    """
    folds = chain.fold_intervals()
    if not folds:
        raise NoOverturnError('chain has no overturned segment')
    if overturn_hint is None:
        i = 0
    else:
        if isinstance(overturn_hint, tuple):
            overturn_hint = overturn_hint[0] + overturn_hint[1]
        centres = np.array([0.5 * (a + b) for a, b in folds])
        i = int(np.argmin(np.abs(centres - overturn_hint)))
    return cut_cluster(chain, folds, i, i, guess)[0]


def cut_cluster(chain, folds, first, last, guess=None):
    """
    Solve folds[first..last] as one cut, widening while the window is too small

    Returns (result, first, last) with the fold range actually used.
    """
    while True:
        try:
            window = fold_window(chain, folds, first, last)
            return solve_window(chain, window, guess), first, last
        except EqualAreaError as err:
            if err.direction == 'right' and last + 1 < len(folds):
                last += 1
            elif err.direction == 'left' and first > 0:
                first -= 1
            else:
                raise
            guess = None
            logging.debug('widening equal-area window to folds %d..%d', first, last)


def equal_area_cuts(chain, previous=()):
    """
    All equal-area cuts of a chain, interacting lobes merged into one cut

    `previous` cuts warm-start Newton for the folds they contain.
    """
    folds = chain.fold_intervals()
    cuts = []
    i = 0
    while i < len(folds):
        guess = None
        for cut in previous:
            if cut.S1 <= folds[i][0] and folds[i][1] <= cut.S2:
                guess = (cut.S1, cut.S2)
                break
        result, first, last = cut_cluster(chain, folds, i, i, guess)
        while cuts and (cuts[-1][2] >= first or cuts[-1][0].S2 > result.S1):
            first = min(first, cuts.pop()[1])
            result, first, last = cut_cluster(chain, folds, first, last)
        cuts.append((result, first, last))
        i = last + 1
    return [cut[0] for cut in cuts]


def measure_shock_speed(result_t1, result_t2, dt):
    """Finite-difference speed of the same cut observed dt apart."""
    return (result_t2.x_star - result_t1.x_star) / dt


def mixed_chain(chain_old_u, chain_new_x):
    """
    Chain with the abscissas of `chain_new_x` and heights of `chain_old_u`
    """
    if len(chain_old_u) != len(chain_new_x):
        raise ChainMismatchError(
            f'segment counts differ ({len(chain_old_u)} vs {len(chain_new_x)})')
    if not np.array_equal(chain_old_u.node_params, chain_new_x.node_params):
        raise ChainMismatchError('chains are built on different node labels')
    control = chain_new_x.control.copy()
    control[:, :, 1] = chain_old_u.control[:, :, 1]
    return CurveChain.from_control(control, chain_new_x.node_params,
                                   chain_new_x.time_stamp, chain_new_x.node_index)


def find_modified_equal_area(chain_old_u, chain_new_x, overturn_hint=None):
    """
    Shock birth under a source: equal area on the mixed chain

    The shock position comes from the mixed chain; its states are read from
    the fully updated chain at the same positions.
    """
    mixed = mixed_chain(chain_old_u, chain_new_x)
    result = find_equal_area(mixed, overturn_hint)
    u_left = float(chain_new_x.point_at(result.S1)[1])
    u_right = float(chain_new_x.point_at(result.S2)[1])
    return EqualAreaResult(result.S1, result.S2, result.x_star, u_left, u_right,
                           result.lobe_residual, result.window)


def equal_area_residual_with_source(chain, prob, s1, s2, t=None):
    """
    Source bias of the plain projection: int Q x_s ds / (u(s1) - u(s2))
    """
    S1 = s1[0] + s1[1] if isinstance(s1, tuple) else float(s1)
    S2 = s2[0] + s2[1] if isinstance(s2, tuple) else float(s2)
    t = chain.time_stamp if t is None else t
    if prob.homogeneous:
        return 0.0
    total = 0.0
    k1, t1 = chain.locate(S1)
    k2, t2 = chain.locate(S2)
    for k in range(k1, k2 + 1):
        ta = t1 if k == k1 else 0.0
        tb = t2 if k == k2 else 1.0
        half = 0.5 * (tb - ta)
        for node, weight in zip(GAUSS_NODES, GAUSS_WEIGHTS):
            s = ta + half * (node + 1.0)
            x, u = _bernstein(s) @ chain.control[k]
            dx = (_bernstein_prime(s) @ chain.control[k])[0]
            total += half * weight * prob.source(u, x, t) * dx
    u1 = float(chain.point_at(S1)[1])
    u2 = float(chain.point_at(S2)[1])
    return total / (u1 - u2)


def naive_equal_area(prob, n_nodes, t, dt=1e-3, mode='hermite', x_hint=None):
    """
    Plain equal-area projection of the multivalued curve, ignoring the source

    All jumps are connected and the nodes are advanced to t without any shock
    handling; the result shows how the projection goes wrong when Q != 0.
    """
    branches, _ = seed_nodes(prob, n_nodes, connect_compressive=True)
    if len(branches) != 1:
        raise InversionError('naive projection needs a single connected branch')
    nodes = branches[0]
    while t - nodes.t > 1e-12 * max(1.0, t):
        nodes = advance(nodes, prob, min(dt, t - nodes.t))
    chain = build_chain(nodes, mode, prob)
    hint = None
    if x_hint is not None:
        folds = chain.fold_intervals()
        if folds:
            dist = [abs(_x_at(chain, 0.5 * (a + b)) - x_hint) for a, b in folds]
            hint = 0.5 * sum(folds[int(np.argmin(dist))])
    return find_equal_area(chain, hint), chain
