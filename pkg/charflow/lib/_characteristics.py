"""
charflow characteristics

Node seeding, exact and RK4 advancement of the extended characteristic
system, and chain building (Hermite or area preserving).

Every node carries a label (x0, sigma) ordered lexicographically. sigma orders
nodes that share x0: corner pairs at piece boundaries, vertical connectors on
jumps of the initial data and nothing else. Tangents (dx_dx0, du_dx0) are
derivatives with respect to whatever parameter runs along the node family.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad

from ._curve import CurveChain, area_preserving_r2, hermite_magnitudes, _gauss_area
from ._errors import CurveError, ExprDomainError, VanishingTangentError

INTERP_MODES = ('hermite', 'area_preserving')
AXIS_TOL = 1e-6


@dataclass(frozen=True)
class CharState:
    """
    Characteristic nodes at time t, stored as parallel arrays

    `area0` is the cumulative integral of the initial data along the labels
    (homogeneous area ledger) and `knot` marks nodes used as interpolation
    knots; both are optional.
    """
    x0: np.ndarray
    sigma: np.ndarray
    x: np.ndarray
    u: np.ndarray
    dx_dx0: np.ndarray
    du_dx0: np.ndarray
    t: float = 0.0
    area0: np.ndarray = None
    knot: np.ndarray = None

    def __len__(self):
        return int(np.size(self.x))

    @property
    def labels(self):
        return np.column_stack([np.atleast_1d(self.x0), np.atleast_1d(self.sigma)])

    @property
    def points(self):
        return np.column_stack([np.atleast_1d(self.x), np.atleast_1d(self.u)])

    @property
    def tangents(self):
        return np.column_stack([np.atleast_1d(self.dx_dx0), np.atleast_1d(self.du_dx0)])

    @property
    def knots(self):
        """Node indices used as chain knots (always includes both ends)."""
        n = len(self)
        mask = np.ones(n, dtype=bool) if self.knot is None else np.array(self.knot, dtype=bool)
        if n:
            mask[0] = mask[-1] = True
        return np.flatnonzero(mask)

    def take(self, index):
        def pick(a):
            return None if a is None else np.atleast_1d(a)[index]
        return replace(self, x0=pick(self.x0), sigma=pick(self.sigma), x=pick(self.x),
                       u=pick(self.u), dx_dx0=pick(self.dx_dx0), du_dx0=pick(self.du_dx0),
                       area0=pick(self.area0), knot=pick(self.knot))

    @classmethod
    def concat(cls, states):
        states = [s for s in states if len(s)]
        if not states:
            raise ValueError('nothing to concatenate')

        def join(name, fill):
            parts = [np.atleast_1d(getattr(s, name)) if getattr(s, name) is not None
                     else np.full(len(s), fill) for s in states]
            return np.concatenate(parts)

        with_area = all(s.area0 is not None for s in states)
        return cls(join('x0', 0.0), join('sigma', 0.0), join('x', 0.0), join('u', 0.0),
                   join('dx_dx0', 0.0), join('du_dx0', 0.0), states[0].t,
                   join('area0', 0.0) if with_area else None, join('knot', True))


def initial_nodes(x0, g, dg, sigma=0.0, t=0.0):
    """Nodes at the start of their characteristics: x = x0, dx_dx0 = 1."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    return CharState(x0=x0, sigma=np.broadcast_to(sigma, x0.shape).astype(float),
                     x=x0.copy(), u=np.broadcast_to(g, x0.shape).astype(float),
                     dx_dx0=np.ones_like(x0),
                     du_dx0=np.broadcast_to(dg, x0.shape).astype(float), t=t)


def advance_homogeneous(node, prob, t_target):
    """
    Exact update for Q = 0: u and du_dx0 are frozen, x moves at F'(u)
    """
    dt = t_target - node.t
    if dt == 0.0:
        return node
    speed = prob.speed(node.u)
    curvature = prob.flux_curvature(node.u)
    return replace(node, x=node.x + speed * dt,
                   dx_dx0=node.dx_dx0 + curvature * node.du_dx0 * dt, t=t_target)


def rhs_extended(state, prob, x=None, u=None, a=None, b=None, t=None):
    """
    Rates (x', dx_dx0', u', du_dx0') of the extended characteristic system
    """
    x = state.x if x is None else x
    u = state.u if u is None else u
    a = state.dx_dx0 if a is None else a
    b = state.du_dx0 if b is None else b
    t = state.t if t is None else t
    try:
        return (prob.speed(u),
                prob.flux_curvature(u) * b,
                prob.source(u, x, t),
                prob.source_u(u, x, t) * b + prob.source_x(u, x, t) * a)
    except ExprDomainError as err:
        raise ExprDomainError(f'{err} ({_first_bad_node(state, prob, x, u, t)})') from err


def _first_bad_node(state, prob, x, u, t):
    x, u = np.atleast_1d(x), np.atleast_1d(u)
    labels = state.labels
    for i in range(len(x)):
        try:
            prob.speed(u[i])
            prob.flux_curvature(u[i])
            prob.source(u[i], x[i], t)
            prob.source_u(u[i], x[i], t)
            prob.source_x(u[i], x[i], t)
        except ExprDomainError:
            return f'node x0={labels[i, 0]:.17g}, sigma={labels[i, 1]:g}'
    return 'node unknown'


def step_rk4(state, prob, dt):
    """One classical Runge-Kutta step of the extended system."""
    if dt == 0.0:
        return state
    if dt < 0.0:
        raise ValueError(f'dt must be positive, got {dt}')
    y = (state.x, state.dx_dx0, state.u, state.du_dx0)
    t = state.t

    def f(y, t):
        return rhs_extended(state, prob, x=y[0], a=y[1], u=y[2], b=y[3], t=t)

    k1 = f(y, t)
    k2 = f(tuple(v + 0.5 * dt * k for v, k in zip(y, k1)), t + 0.5 * dt)
    k3 = f(tuple(v + 0.5 * dt * k for v, k in zip(y, k2)), t + 0.5 * dt)
    k4 = f(tuple(v + dt * k for v, k in zip(y, k3)), t + dt)
    x, a, u, b = (v + dt / 6.0 * (p + 2.0 * q + 2.0 * r + s)
                  for v, p, q, r, s in zip(y, k1, k2, k3, k4))
    return replace(state, x=x, dx_dx0=a, u=u, du_dx0=b, t=t + dt)


def advance(nodes, prob, dt):
    """Exact when the problem has no source, one RK4 step otherwise."""
    if prob.homogeneous:
        return advance_homogeneous(nodes, prob, nodes.t + dt)
    return step_rk4(nodes, prob, dt)


@dataclass(frozen=True)
class Jump:
    """A jump of the initial data and, when connected, its node span."""
    x: float
    u_minus: float
    u_plus: float
    branch: int
    first: int = None
    last: int = None

    @property
    def compressive(self):
        return self.u_minus > self.u_plus


def connector_nodes(x_j, u_minus, u_plus, count, sigma0=1.0, t=0.0):
    """
    Vertical connector on a jump: count interior nodes plus both ends, u evenly spaced
    """
    us = np.linspace(u_minus, u_plus, count + 2)
    step = (u_plus - u_minus) / (count + 1)
    m = len(us)
    return CharState(x0=np.full(m, float(x_j)), sigma=sigma0 + np.arange(m, dtype=float),
                     x=np.full(m, float(x_j)), u=us, dx_dx0=np.zeros(m),
                     du_dx0=np.full(m, step), t=t, knot=np.ones(m, dtype=bool))


def default_connector_count(prob, n_nodes, du):
    length = max(p.hi - p.lo for p in prob.pieces)
    h = length / (n_nodes - 1)
    return max(2, int(round(abs(du) / h)))


def seed_nodes(prob, n_nodes, connect_compressive=True, subdivisions=1,
               connector_count=None, ledger=False):
    """
    Initial nodes per piece, split into branches at unconnected jumps

    Returns (branches, jumps). Each piece gets a uniform grid of n_nodes
    knots with `subdivisions` - 1 extra nodes per interval. Rarefaction jumps
    always get a vertical connector; compressive jumps get one only when
    `connect_compressive` is set, otherwise they start a new branch.
    """
    if n_nodes < 2:
        raise ValueError(f'need at least 2 nodes per piece, got {n_nodes}')
    m = max(int(subdivisions), 1)
    branches = []
    jumps = []
    current = []
    running_area = 0.0
    count = 0
    for p, piece in enumerate(prob.pieces):
        lo = prob.pieces[p - 1].hi if p > 0 else piece.lo
        x0 = np.linspace(lo, piece.hi, (n_nodes - 1) * m + 1)
        u = piece.value(x0)
        nodes = initial_nodes(x0, u, piece.slope(x0))
        knot = np.arange(len(x0)) % m == 0
        area = None
        if ledger:
            steps = [quad(lambda s: float(piece.value(s)), a, b, epsabs=1e-13, epsrel=1e-13)[0]
                     for a, b in zip(x0[:-1], x0[1:])]
            area = running_area + np.concatenate([[0.0], np.cumsum(steps)])
            running_area = area[-1]
        if p > 0:
            x_j = piece.lo
            u_minus = float(current[-1].u[-1]) if current else float(branches[-1].u[-1])
            u_plus = float(u[0])
            jump = abs(u_minus - u_plus) > 1e-12 * (1.0 + abs(u_minus))
            if not jump:
                u = u.copy()
                u[0] = u_minus
                nodes = replace(nodes, u=u, sigma=np.where(np.arange(len(x0)) == 0, 1.0, 0.0))
            elif u_minus < u_plus or connect_compressive:
                k = connector_count or default_connector_count(prob, n_nodes, u_plus - u_minus)
                conn = connector_nodes(x_j, u_minus, u_plus, k)
                if ledger:
                    conn = replace(conn, area0=np.full(len(conn), area[0]))
                first = count
                current.append(conn)
                count += len(conn)
                jumps.append(Jump(x_j, u_minus, u_plus, len(branches), first, count - 1))
                nodes = replace(nodes, sigma=np.where(np.arange(len(x0)) == 0,
                                                      conn.sigma[-1] + 1.0, 0.0))
            else:
                branches.append(CharState.concat(current))
                current, count = [], 0
                jumps.append(Jump(x_j, u_minus, u_plus, len(branches)))
        nodes = replace(nodes, knot=knot, area0=area)
        current.append(nodes)
        count += len(nodes)
    branches.append(CharState.concat(current))
    logging.debug('seeded %d branch(es), %d node(s), %d jump(s)',
                  len(branches), sum(len(b) for b in branches), len(jumps))
    return branches, jumps


def boundary_node(prob, t):
    """Node injected at the inflow boundary at time t, labelled x_min - t."""
    x_min = prob.domain[0]
    u_b = prob.boundary.value
    return CharState(x0=np.array([x_min - t]), sigma=np.zeros(1), x=np.array([x_min]),
                     u=np.array([u_b]), dx_dx0=np.array([prob.speed(u_b)]),
                     du_dx0=np.array([prob.source(u_b, x_min, t)]), t=t,
                     knot=np.ones(1, dtype=bool))


def area_ledger_update(prob, interval, t):
    """
    Exact area under the evolved curve between two labels (homogeneous case)

    The static part is the integral of g over the interval at t=0; the
    dynamic part telescopes to t [G(g)] with G(u) = u F'(u) - F(u).
    """
    a, b = interval
    piece = prob.piece_at(0.5 * (a + b))
    static = quad(lambda s: float(piece.value(s)), a, b, epsabs=1e-12)[0]
    ua, ub = float(piece.value(a)), float(piece.value(b))
    return static + t * (_flux_potential(prob, ub) - _flux_potential(prob, ua))


def _flux_potential(prob, u):
    return u * prob.speed(u) - prob.flux(u)


def _segment_axes(tan0, tan1):
    """0 where both tangents have a usable x component, else 1 (u axis)."""
    n0 = np.hypot(tan0[:, 0], tan0[:, 1])
    n1 = np.hypot(tan1[:, 0], tan1[:, 1])
    x_ok = np.minimum(np.abs(tan0[:, 0]) / n0, np.abs(tan1[:, 0]) / n1)
    u_ok = np.minimum(np.abs(tan0[:, 1]) / n0, np.abs(tan1[:, 1]) / n1)
    axes = np.where((x_ok >= AXIS_TOL) | (x_ok >= u_ok), 0, 1)
    return axes


def _magnitudes(p0, p1, tan0, tan1):
    axes = _segment_axes(tan0, tan1)
    r1 = np.empty(len(p0))
    r2 = np.empty(len(p0))
    for axis in (0, 1):
        sel = axes == axis
        if np.any(sel):
            try:
                r1[sel], r2[sel] = hermite_magnitudes(p0[sel], p1[sel], tan0[sel], tan1[sel], axis)
            except VanishingTangentError as err:
                index = None if err.interval is None else int(np.flatnonzero(sel)[err.interval])
                raise VanishingTangentError(
                    f'tangent vanishes on interval {index}; refine the grid', index) from err
    return r1, r2


def _sub_hermite_areas(nodes):
    """Parametric Hermite area of every node interval."""
    P = nodes.points
    T = nodes.tangents
    if len(P) < 2:
        return np.empty(0)
    p0, p1, t0, t1 = P[:-1], P[1:], T[:-1], T[1:]
    same = np.all(p0 == p1, axis=1)
    areas = np.zeros(len(p0))
    live = ~same
    if np.any(live):
        r1, r2 = _magnitudes(p0[live], p1[live], t0[live], t1[live])
        control = np.stack([p0[live], p0[live] + (r1 / 3.0)[:, None] * t0[live],
                            p1[live] - (r2 / 3.0)[:, None] * t1[live], p1[live]], axis=1)
        areas[live] = _gauss_area(control)
    return areas


def build_chain(nodes, mode, prob, diagnostics=None):
    """
    Chain through the knots of `nodes`, one cubic per knot interval

    In area_preserving mode r2 is re-solved so each segment carries its
    target area: the exact ledger when `nodes.area0` is present, otherwise
    the sum of the parametric Hermite areas of the node intervals it spans.
    Zero-length knot intervals (corner pairs) are skipped.
    """
    if mode not in INTERP_MODES:
        raise ValueError(f'unknown interpolation mode "{mode}"')
    labels = nodes.labels
    if len(labels) > 1:
        d0 = np.diff(labels[:, 0])
        d1 = np.diff(labels[:, 1])
        if not np.all((d0 > 0.0) | ((d0 == 0.0) & (d1 > 0.0))):
            raise CurveError('nodes must be sorted by label')
    idx = nodes.knots
    P = nodes.points[idx]
    T = nodes.tangents[idx]
    if len(idx) == 1:
        return CurveChain(P, np.empty((0, 2)), np.empty((0, 2)), [], [], labels[idx],
                          nodes.t, node_index=idx)
    keep = ~np.all(P[:-1] == P[1:], axis=1)
    starts = np.flatnonzero(keep)
    if not len(starts):
        return CurveChain(P[:1], np.empty((0, 2)), np.empty((0, 2)), [], [], labels[idx[:1]],
                          nodes.t, node_index=idx[:1])
    p0, p1 = P[starts], P[starts + 1]
    t0, t1 = T[starts], T[starts + 1]
    r1, r2 = _magnitudes(p0, p1, t0, t1)
    if mode == 'area_preserving':
        if nodes.area0 is not None:
            area0 = nodes.area0[idx]
            G = _flux_potential(prob, P[:, 1])
            targets = (area0[starts + 1] - area0[starts]) + nodes.t * (G[starts + 1] - G[starts])
        else:
            fine = _sub_hermite_areas(nodes)
            sums = np.add.reduceat(fine, idx[:-1]) if len(fine) else np.zeros(len(idx) - 1)
            targets = sums[starts]
        r2, degenerate, consistent = area_preserving_r2(p0, p1, t0, t1, r1, targets, fallback=r2)
        if np.any(degenerate):
            logging.debug('%d degenerate area solve(s) at t=%s, Hermite r2 kept',
                          int(degenerate.sum()), nodes.t)
            if not np.all(consistent):
                logging.warning('%d segment(s) cannot carry their target area at t=%s',
                                int((~consistent).sum()), nodes.t)
            if diagnostics is not None:
                diagnostics['degenerate_area'] = diagnostics.get('degenerate_area', 0) + int(
                    degenerate.sum())
    points = np.concatenate([p0, p1[-1:]])
    node_index = np.concatenate([idx[starts], idx[starts[-1] + 1:starts[-1] + 2]])
    return CurveChain(points, t0, t1, r1, r2, labels[node_index], nodes.t,
                      node_index=node_index)
