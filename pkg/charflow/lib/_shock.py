"""
charflow shock

Shock propagation with explicit Runge-Kutta on the Rankine-Hugoniot
condition, slopes taken from the branches on either side inside their region
of overlap; trimming, collision detection and merging.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from ._curve import invert_x
from ._errors import InversionError, MergeError, NonMonotoneError, OverlapError

SHOCK_METHODS = {
    'euler': ((0.0,), ((),), (1.0,)),
    'heun': ((0.0, 1.0), ((), (1.0,)), (0.5, 0.5)),
    'rk4': ((0.0, 0.5, 0.5, 1.0),
            ((), (0.5,), (0.0, 0.5), (0.0, 0.0, 1.0)),
            (1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0)),
}

GUARD_SEGMENTS = 2
COLLISION_TOL = 1e-13
STATE_TOL = 1e-12


@dataclass(frozen=True)
class Branch:
    """One smooth piece of the solution: its nodes and the chain through them."""
    nodes: object
    chain: object


@dataclass(frozen=True)
class Shock:
    """
    A tracked discontinuity

    In equal-area runs S1/S2 hold the cut positions on the single chain. In
    shock-propagation runs left_branch/right_branch are the branches on
    either side and the anchors (x0, sigma, t) locate the shock on them by
    node label, so they survive trimming and boundary injection.
    """
    id: int
    x_star: float
    u_left: float
    u_right: float
    left_branch: Branch = None
    right_branch: Branch = None
    S1: float = None
    S2: float = None
    left_anchor: tuple = None
    right_anchor: tuple = None


@dataclass(frozen=True)
class OverlapRegion:
    """x-interval where both branches are defined and x-monotone."""
    lo: float
    hi: float
    left_window: tuple
    right_window: tuple

    def contains(self, z, tol=0.0):
        return self.lo - tol <= z <= self.hi + tol


def _end_x(chain, S):
    if len(chain) == 0:
        return float(chain.points[0, 0])
    return float(chain.point_at(S)[0])


def _run(chain, S):
    try:
        return chain.increasing_run(S)
    except NonMonotoneError as err:
        raise OverlapError(f'branch is overturned at its shock side: {err}') from err


def overlap_region(left, right, left_anchor=None, right_anchor=None):
    """
    Region of overlap of a left and a right branch chain

    Each branch contributes the increasing run around its anchor (chain
    position on the shock side, defaulting to the far end of the left chain
    and the start of the right chain). lo is where the right run starts, hi
    where the left run ends.
    """
    wl = _run(left, float(len(left)) if left_anchor is None else left_anchor)
    wr = _run(right, 0.0 if right_anchor is None else right_anchor)
    lo = max(_end_x(right, wr[0]), _end_x(left, wl[0]))
    hi = min(_end_x(left, wl[1]), _end_x(right, wr[1]))
    return OverlapRegion(lo, hi, wl, wr)


def _crossing(chain, z, window, side):
    """(segment, parameter, u) of the branch at z, z clipped into the window."""
    if len(chain) == 0:
        return 0, 0.0, float(chain.points[0, 1])
    z = min(max(z, _end_x(chain, window[0])), _end_x(chain, window[1]))
    return invert_x(chain, z, window[0], window[1], side=side)


def shock_states(z, left, right, region=None, tol=None):
    """(u_left, u_right) read from the branches at z."""
    region = overlap_region(left, right) if region is None else region
    tol = STATE_TOL * max(1.0, abs(z)) if tol is None else tol
    if not region.contains(z, tol):
        raise OverlapError(
            f'z={z!r} is outside the region of overlap [{region.lo!r}, {region.hi!r}]',
            z, region.lo, region.hi)
    try:
        u_left = _crossing(left, z, region.left_window, 'right')[2]
        u_right = _crossing(right, z, region.right_window, 'left')[2]
    except InversionError as err:
        raise OverlapError(f'cannot read branch heights at z={z!r}: {err}',
                           z, region.lo, region.hi) from err
    return u_left, u_right


def rh_speed(prob, u_left, u_right):
    if abs(u_left - u_right) < 1e-12:
        return float(prob.speed(0.5 * (u_left + u_right)))
    return float((prob.flux(u_left) - prob.flux(u_right)) / (u_left - u_right))


def rh_slope(z, left, right, prob, region=None):
    """
    Rankine-Hugoniot slope field at z from the two branch chains
    """
    u_left, u_right = shock_states(z, left, right, region)
    return rh_speed(prob, u_left, u_right)


def step_shock(x_star, provider, dt, method, prob):
    """
    One explicit Runge-Kutta step of the shock position

    `provider(c)` returns (left, right, region) with the chains advanced to
    t + c dt; region may be None for the default windows. Raises OverlapError
    when a stage abscissa leaves the region of overlap.
    """
    try:
        c, a, b = SHOCK_METHODS[method]
    except KeyError:
        raise ValueError(f'unknown shock method "{method}"') from None
    slopes = []
    for ci, ai in zip(c, a):
        z = x_star + dt * sum(aij * kj for aij, kj in zip(ai, slopes))
        left, right, region = provider(ci)
        slopes.append(rh_slope(z, left, right, prob, region))
    return x_star + dt * sum(bi * ki for bi, ki in zip(b, slopes))


def shock_positions(left, right, new_x, region=None):
    """Chain positions (S_left, S_right) of new_x on both branches."""
    region = overlap_region(left, right) if region is None else region
    k, t, _ = _crossing(left, new_x, region.left_window, 'right')
    S_left = k + t if len(left) else 0.0
    k, t, _ = _crossing(right, new_x, region.right_window, 'left')
    S_right = k + t if len(right) else 0.0
    return S_left, S_right


def trim_after_step(left, right, new_x, guard=GUARD_SEGMENTS, region=None):
    """
    Drop branch data consumed by the shock, keeping `guard` segments beyond it

    `left` and `right` are Branch objects whose chains were built from their
    nodes; returns the trimmed node sets (chains must be rebuilt). Each side
    keeps at least two nodes.
    """
    S_left, S_right = shock_positions(left.chain, right.chain, new_x, region)
    return (trim_tail(left, S_left, guard), trim_head(right, S_right, guard))


def trim_tail(branch, S, guard=GUARD_SEGMENTS):
    """Nodes of `branch` up to the segment holding S plus `guard` segments."""
    chain = branch.chain
    if not len(chain):
        return branch.nodes
    k = min(int(np.floor(S)), len(chain) - 1)
    last = int(chain.node_index[min(k + 1 + guard, len(chain))])
    return branch.nodes.take(slice(0, max(last, 1) + 1))


def trim_head(branch, S, guard=GUARD_SEGMENTS):
    """Nodes of `branch` from `guard` segments before the one holding S."""
    chain = branch.chain
    if not len(chain):
        return branch.nodes
    k = min(int(np.floor(S)), len(chain) - 1)
    first = int(chain.node_index[max(k - guard, 0)])
    return branch.nodes.take(slice(min(first, len(branch.nodes) - 2), None))


@dataclass(frozen=True)
class CollisionEvent:
    index: int
    t: float
    dt: float


def detect_collision(before, after, t, dt, scale=1.0):
    """
    First adjacent pair whose gap closes during the proposed step

    `before` and `after` are the shock positions at t and t + dt. The event
    time is the linear estimate; refine_collision sharpens it.
    """
    tol = COLLISION_TOL * scale
    best = None
    for i in range(len(before) - 1):
        g0 = before[i + 1] - before[i]
        g1 = after[i + 1] - after[i]
        if g1 > tol:
            continue
        tau = dt if g0 <= g1 else min(max(g0 * dt / (g0 - g1), 0.0), dt)
        if best is None or tau < best.dt:
            best = CollisionEvent(i, t + tau, tau)
    return best


def refine_collision(gap, dt, scale=1.0):
    """
    Step size at which `gap(dt')` closes, by bracketing on (0, dt]
    """
    if gap(dt) >= -COLLISION_TOL * scale:
        return dt
    return float(brentq(gap, 0.0, dt, xtol=1e-15, rtol=4.0 * np.finfo(float).eps,
                        maxiter=200))


def merge_shocks(a, b, tol=None):
    """
    Single shock replacing two adjacent, coincident shocks
    """
    if a.right_branch is not None and b.left_branch is not None \
            and a.right_branch is not b.left_branch:
        raise MergeError(f'shocks {a.id} and {b.id} are not adjacent')
    tol = 1e-9 * max(1.0, abs(a.x_star)) if tol is None else tol
    if abs(a.x_star - b.x_star) > tol:
        raise MergeError(
            f'shocks {a.id} and {b.id} do not coincide ({a.x_star!r} vs {b.x_star!r})')
    if not a.u_left > b.u_right:
        raise MergeError(
            f'merged shock would violate the entropy ordering '
            f'({a.u_left!r} <= {b.u_right!r})')
    merged = replace(a, id=min(a.id, b.id), x_star=0.5 * (a.x_star + b.x_star),
                     u_right=b.u_right, right_branch=b.right_branch)
    logging.info('merged shocks %d and %d at x=%.12g', a.id, b.id, merged.x_star)
    return merged


def anchor_at(chain, S):
    """Anchor (x0, sigma, t) naming chain position S by the label of its segment start."""
    if len(chain) == 0:
        return float(chain.node_params[0, 0]), float(chain.node_params[0, 1]), 0.0
    k, t = chain.locate(S)
    return float(chain.node_params[k, 0]), float(chain.node_params[k, 1]), float(t)


def resolve_anchor(chain, anchor):
    """Chain position of an anchor; None when its node is no longer a knot."""
    if anchor is None:
        return None
    params = chain.node_params
    hit = np.flatnonzero((params[:, 0] == anchor[0]) & (params[:, 1] == anchor[1]))
    if not len(hit):
        return None
    if len(chain) == 0:
        return 0.0
    return min(int(hit[0]) + anchor[2], float(len(chain)))
