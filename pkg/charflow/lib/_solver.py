"""
charflow solver

Simulation driver: seeding, global time steps with shock birth, propagation,
collision and merging, sampling of the weak solution and the conservation
ledger.

Two regimes are used. Homogeneous problems without a boundary keep a single
multivalued curve advanced exactly from t=0 and cut it by equal area at every
output time. Everything else is split into branches separated by shocks that
are moved with the Rankine-Hugoniot ODE.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from ._characteristics import (
    INTERP_MODES,
    CharState,
    advance as advance_nodes,
    advance_homogeneous,
    boundary_node,
    build_chain,
    seed_nodes,
)
from ._curve import GAUSS_NODES, GAUSS_WEIGHTS, _bernstein, _bernstein_prime, invert_x
from ._errors import (
    CharflowError,
    ConfigError,
    ExprDomainError,
    InversionError,
    NonMonotoneError,
    OverlapError,
    ProjectionError,
    SolverError,
)
from ._projection import equal_area_cuts, find_modified_equal_area
from ._shock import (
    GUARD_SEGMENTS,
    SHOCK_METHODS,
    Branch,
    Shock,
    anchor_at,
    detect_collision,
    merge_shocks,
    overlap_region,
    refine_collision,
    resolve_anchor,
    shock_positions,
    shock_states,
    step_shock,
    trim_head,
    trim_tail,
)

MAX_HALVINGS = 40
LANDING_TOL = 1e-12
AT_SHOCK_TOL = 1e-13

_GL_BASIS = _bernstein(0.5 * (GAUSS_NODES + 1.0))
_GL_BASIS_PRIME = _bernstein_prime(0.5 * (GAUSS_NODES + 1.0))


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters; invalid values raise ConfigError."""
    n_nodes: int = 80
    dt: float = 0.01
    interp: str = 'area_preserving'
    shock_method: str = 'rk4'
    area_subdivisions: int = 10
    guard: int = GUARD_SEGMENTS
    connector_count: int = None
    boundary_stride: int = None

    def __post_init__(self):
        if int(self.n_nodes) < 2:
            raise ConfigError(f'n_nodes must be at least 2, got {self.n_nodes}')
        if not self.dt > 0.0:
            raise ConfigError(f'dt must be positive, got {self.dt}')
        if self.interp not in INTERP_MODES:
            raise ConfigError(
                f'unknown interpolation "{self.interp}", choose from {", ".join(INTERP_MODES)}')
        if self.shock_method not in SHOCK_METHODS:
            raise ConfigError(
                f'unknown shock method "{self.shock_method}", '
                f'choose from {", ".join(SHOCK_METHODS)}')
        if int(self.area_subdivisions) < 1:
            raise ConfigError('area_subdivisions must be at least 1')
        if int(self.guard) < 0:
            raise ConfigError('guard must not be negative')
        if self.connector_count is not None and int(self.connector_count) < 1:
            raise ConfigError('connector_count must be at least 1')
        if self.boundary_stride is not None and int(self.boundary_stride) < 1:
            raise ConfigError('boundary_stride must be at least 1')


@dataclass
class SolverState:
    """
    Everything a run carries between steps

    One owner advances the state in place; samples handed out are copies.
    `branches` and `shocks` interleave: shock i sits between branch i and
    branch i+1. In the equal-area regime there is one branch and every shock
    is a cut (S1, S2) of it.
    """
    problem: object
    config: SolverConfig
    mode: str
    t: float = 0.0
    step: int = 0
    branches: list = field(default_factory=list)
    shocks: list = field(default_factory=list)
    initial: CharState = None
    initial_area: float = 0.0
    next_id: int = 0
    stride: int = 1
    knot_every: int = 1
    last_retained: int = 0
    boundary_kept: int = 0
    flux_integral: float = 0.0
    source_integral: float = 0.0
    rates: tuple = (0.0, 0.0)
    diagnostics: dict = field(default_factory=lambda: {
        'steps': 0, 'rejected_steps': 0, 'degenerate_area': 0, 'births': 0, 'merges': 0})


@dataclass(frozen=True)
class SolutionPiece:
    """Single-valued portion [x_lo, x_hi] of one chain, positions S_lo..S_hi."""
    x_lo: float
    x_hi: float
    chain: object
    S_lo: float
    S_hi: float


@dataclass(frozen=True)
class WeakSolutionSample:
    """
    Samples (x, u) sorted by x; a shock position appears twice, left state first
    """
    t: float
    points: np.ndarray
    shock_positions: tuple

    @property
    def x(self):
        return self.points[:, 0]

    @property
    def u(self):
        return self.points[:, 1]


def initialize(prob, config=None, **overrides):
    """
    Seed nodes and initial chains and register the shocks of the initial data
    """
    config = replace(config or SolverConfig(), **overrides)
    mode = 'equal_area' if prob.homogeneous and prob.boundary is None else 'pspm'
    state = SolverState(problem=prob, config=config, mode=mode)
    try:
        if mode == 'equal_area':
            _init_equal_area(state)
        else:
            _init_pspm(state)
    except (ConfigError, SolverError):
        raise
    except CharflowError as err:
        raise SolverError(f'cannot initialize {prob.name}: {err}', t=0.0, step=0) from err
    state.initial_area = prob.initial_area()
    state.rates = _rates(state)
    logging.info('%s: %s regime, %d branch(es), %d shock(s)',
                 prob.name, mode, len(state.branches), len(state.shocks))
    return state


def _init_equal_area(state):
    prob, config = state.problem, state.config
    node_sets, jumps = seed_nodes(prob, config.n_nodes, connect_compressive=True,
                                  connector_count=config.connector_count,
                                  ledger=config.interp == 'area_preserving')
    nodes = node_sets[0]
    chain = build_chain(nodes, config.interp, prob, state.diagnostics)
    state.initial = nodes
    state.branches = [Branch(nodes, chain)]
    for jump in jumps:
        if not jump.compressive:
            continue
        S1 = float(np.flatnonzero(chain.node_index == jump.first)[0])
        S2 = float(np.flatnonzero(chain.node_index == jump.last)[0])
        state.shocks.append(Shock(state.next_id, jump.x, jump.u_minus, jump.u_plus,
                                  S1=S1, S2=S2))
        state.next_id += 1


def _init_pspm(state):
    prob, config = state.problem, state.config
    m = config.area_subdivisions if config.interp == 'area_preserving' else 1
    node_sets, jumps = seed_nodes(prob, config.n_nodes, connect_compressive=False,
                                  subdivisions=m, connector_count=config.connector_count)
    splits = [(j.x, j.u_minus, j.u_plus) for j in jumps if j.compressive]
    if prob.boundary is not None:
        x_min = prob.domain[0]
        u_b = prob.boundary.value
        inside = prob.initial_value(x_min)
        if u_b > inside + 1e-12 * (1.0 + abs(inside)):
            node_sets.insert(0, boundary_node(prob, 0.0))
            splits.insert(0, (x_min, u_b, inside))
        length = min(p.hi - p.lo for p in prob.pieces)
        h_fine = length / ((config.n_nodes - 1) * m)
        stride = config.boundary_stride or prob.boundary.stride
        state.stride = stride or max(1, int(round(h_fine / (prob.speed(u_b) * config.dt))))
        spacing = state.stride * prob.speed(u_b) * config.dt
        state.knot_every = max(1, int(round(m * h_fine / spacing))) if m > 1 else 1
        logging.debug('boundary injection stride %d, knot every %d',
                      state.stride, state.knot_every)
    branches = [Branch(nodes, build_chain(nodes, config.interp, prob, state.diagnostics))
                for nodes in node_sets]
    shocks = []
    for i, (x, u_minus, u_plus) in enumerate(splits):
        left, right = branches[i], branches[i + 1]
        shocks.append(Shock(i, float(x), u_minus, u_plus, left, right,
                            left_anchor=anchor_at(left.chain, float(len(left.chain))),
                            right_anchor=anchor_at(right.chain, 0.0)))
    state.branches = branches
    state.shocks = shocks
    state.next_id = len(shocks)


def advance(state, t_target):
    """
    Step the state to t_target, the last step shortened to land on it exactly
    """
    if t_target < state.t - LANDING_TOL * max(1.0, abs(state.t)):
        raise SolverError(f'cannot step backwards to t={t_target!r}', t=state.t, step=state.step)
    tol = LANDING_TOL * max(1.0, abs(t_target))
    try:
        while t_target - state.t > tol:
            h = min(state.config.dt, t_target - state.t)
            if t_target - (state.t + h) <= tol:
                h = t_target - state.t
            _attempt(state, h)
    except SolverError:
        raise
    except CharflowError as err:
        raise SolverError(f'{type(err).__name__}: {err}', t=state.t, step=state.step) from err
    return state


def _attempt(state, h):
    step = _equal_area_step if state.mode == 'equal_area' else _pspm_step
    for halvings in range(MAX_HALVINGS + 1):
        try:
            return step(state, h)
        except OverlapError as err:
            if halvings == MAX_HALVINGS:
                raise SolverError(
                    f'step rejected {MAX_HALVINGS} times ({err}); {_dump(state)}',
                    t=state.t, step=state.step) from err
            state.diagnostics['rejected_steps'] += 1
            logging.info('step rejected at t=%.9g (%s), retrying with dt=%.3g',
                         state.t, err, 0.5 * h)
            h *= 0.5


def _dump(state):
    sizes = ', '.join(str(len(b.nodes)) for b in state.branches)
    shocks = ', '.join(f'#{s.id}@{s.x_star:.12g} [{s.u_left:.6g}|{s.u_right:.6g}]'
                       for s in state.shocks)
    return f'branch sizes [{sizes}], shocks [{shocks}]'


def _finish_step(state, dt):
    old = state.rates
    state.t += dt
    state.step += 1
    state.diagnostics['steps'] += 1
    state.rates = _rates(state)
    state.flux_integral += 0.5 * dt * (old[0] + state.rates[0])
    state.source_integral += 0.5 * dt * (old[1] + state.rates[1])
    return dt


def _equal_area_step(state, dt):
    prob, config = state.problem, state.config
    t_new = state.t + dt
    nodes = advance_homogeneous(state.initial, prob, t_new)
    chain = build_chain(nodes, config.interp, prob, state.diagnostics)
    cuts = equal_area_cuts(chain, previous=state.shocks)
    shocks = []
    for cut in cuts:
        before = [s for s in state.shocks if s.S1 <= cut.S2 and cut.S1 <= s.S2]
        if before:
            sid = min(s.id for s in before)
            if len(before) > 1:
                state.diagnostics['merges'] += len(before) - 1
                logging.info('shocks %s merged into %d at t=%.9g',
                             [s.id for s in before], sid, t_new)
        else:
            sid = state.next_id
            state.next_id += 1
            state.diagnostics['births'] += 1
            logging.info('shock %d born at t=%.9g, x=%.12g', sid, t_new, cut.x_star)
        shocks.append(Shock(sid, cut.x_star, cut.u_left, cut.u_right, S1=cut.S1, S2=cut.S2))
    state.branches = [Branch(nodes, chain)]
    state.shocks = shocks
    return _finish_step(state, dt)


class _Stages:
    """Branches advanced to the stage times of one step, built on demand."""

    def __init__(self, state, dt):
        self.state = state
        self.dt = dt
        self.moved = {}
        self.built = {}

    def nodes(self, i, c):
        """Nodes of branch i at t + c dt without boundary injection."""
        key = (i, c)
        if key not in self.moved:
            self.moved[key] = advance_nodes(self.state.branches[i].nodes,
                                            self.state.problem, c * self.dt)
        return self.moved[key]

    def branch(self, i, c):
        if c == 0.0:
            return self.state.branches[i]
        key = (i, c)
        if key not in self.built:
            nodes = self.nodes(i, c)
            if i == 0:
                nodes = _inject(self.state, nodes, self.state.t + c * self.dt)
            chain = build_chain(nodes, self.state.config.interp, self.state.problem)
            self.built[key] = Branch(nodes, chain)
        return self.built[key]

    def provider(self, i):
        shock = self.state.shocks[i]

        def provide(c):
            left, right = self.branch(i, c), self.branch(i + 1, c)
            region = overlap_region(left.chain, right.chain,
                                    resolve_anchor(left.chain, shock.left_anchor),
                                    resolve_anchor(right.chain, shock.right_anchor))
            return left.chain, right.chain, region
        return provide

    def positions(self, indices=None):
        state = self.state
        indices = range(len(state.shocks)) if indices is None else indices
        return [step_shock(state.shocks[i].x_star, self.provider(i), self.dt,
                           state.config.shock_method, state.problem) for i in indices]


def _keeps_former(state, nodes):
    """
    Whether the previous boundary node survives the next injection

    None when the first node is not a boundary node.
    """
    if state.problem.boundary is None or not len(nodes):
        return None
    if len(nodes) == 1:
        return True
    if not nodes.x0[0] < state.problem.domain[0]:
        return None
    return state.step - state.last_retained >= state.stride


def _inject(state, nodes, t_new):
    """
    Prepend the inflow node for t_new

    A retained boundary node becomes a knot every `knot_every` retentions
    and a fine node otherwise, so inflow knots are about as far apart as
    the seeded ones.
    """
    if state.problem.boundary is None or t_new <= 0.0:
        return nodes
    keep = _keeps_former(state, nodes)
    if keep is False:
        nodes = nodes.take(slice(1, None))
    elif keep:
        knot = np.ones(len(nodes), dtype=bool) if nodes.knot is None else nodes.knot.copy()
        knot[0] = (state.boundary_kept + 1) % state.knot_every == 0
        nodes = replace(nodes, knot=knot)
    return CharState.concat([boundary_node(state.problem, t_new), nodes])


def _scale(state):
    xs = [abs(s.x_star) for s in state.shocks]
    return max([1.0] + xs)


def _pspm_step(state, dt):
    stages = _Stages(state, dt)
    new_x = stages.positions()
    event = detect_collision([s.x_star for s in state.shocks], new_x, state.t, dt,
                             _scale(state))
    merge = None
    if event is not None:
        i = event.index
        a, b = state.shocks[i], state.shocks[i + 1]

        def gap(h):
            if h == 0.0:
                return b.x_star - a.x_star
            xa, xb = _Stages(state, h).positions((i, i + 1))
            return xb - xa

        h = refine_collision(gap, dt, _scale(state))
        logging.info('shocks %d and %d collide at t=%.12g', a.id, b.id, state.t + h)
        if h < dt:
            dt = h
            stages = _Stages(state, dt)
            new_x = stages.positions()
        merge = (a.id, b.id)
    _commit(state, stages, new_x, merge)
    return _finish_step(state, dt)


def _births(state, t_new, old_chain, nodes, head, tail, next_id):
    """Split `nodes` at the first overturn between the shocks bounding it."""
    prob, config = state.problem, state.config
    chain = build_chain(nodes, config.interp, prob)
    folds = chain.fold_intervals()
    if not folds:
        return [nodes], []
    lo = resolve_anchor(chain, head) if head is not None else None
    hi = resolve_anchor(chain, tail) if tail is not None else None
    lo = -1.0 if lo is None else lo
    hi = len(chain) + 1.0 if hi is None else hi
    active = [f for f in folds if lo < f[0] and f[1] < hi]
    if not active:
        return [nodes], []
    Sa, Sb = active[0]
    try:
        result = find_modified_equal_area(old_chain, chain, 0.5 * (Sa + Sb))
    except ProjectionError as err:
        logging.debug('birth postponed at t=%.9g: %s', t_new, err)
        return [nodes], []
    n = len(chain)
    k1 = min(int(np.floor(result.S1)), n - 1)
    k2 = min(int(np.floor(result.S2)), n - 1)
    last = int(chain.node_index[min(k1 + 1 + config.guard, n)])
    first = min(int(chain.node_index[max(k2 - config.guard, 0)]), len(nodes) - 2)
    shock = Shock(next_id, result.x_star, result.u_left, result.u_right,
                  left_anchor=anchor_at(chain, result.S1),
                  right_anchor=anchor_at(chain, result.S2))
    logging.info('shock %d born at t=%.9g, x=%.12g', next_id, t_new, result.x_star)
    return [nodes.take(slice(0, last + 1)), nodes.take(slice(first, None))], [shock]


def _commit(state, stages, new_x, merge):
    prob, config = state.problem, state.config
    t_new = state.t + stages.dt
    moved = [replace(s, x_star=x) for s, x in zip(state.shocks, new_x)]
    node_sets, shocks = [], []
    next_id = state.next_id
    for i, branch in enumerate(state.branches):
        if i > 0:
            shocks.append(moved[i - 1])
        head = moved[i - 1].right_anchor if i > 0 else None
        tail = moved[i].left_anchor if i < len(moved) else None
        parts, born = _births(state, t_new, branch.chain, stages.nodes(i, 1.0),
                              head, tail, next_id)
        next_id += len(born)
        node_sets.extend(parts)
        shocks.extend(born)
    retained = _keeps_former(state, node_sets[0]) if prob.boundary is not None else None
    node_sets[0] = _inject(state, node_sets[0], t_new)

    branches = [Branch(nodes, build_chain(nodes, config.interp, prob)) for nodes in node_sets]
    located = []
    for j, shock in enumerate(shocks):
        left, right = branches[j], branches[j + 1]
        region = overlap_region(left.chain, right.chain,
                                resolve_anchor(left.chain, shock.left_anchor),
                                resolve_anchor(right.chain, shock.right_anchor))
        located.append(shock_positions(left.chain, right.chain, shock.x_star, region))
        shocks[j] = replace(shock,
                            left_anchor=anchor_at(left.chain, located[j][0]),
                            right_anchor=anchor_at(right.chain, located[j][1]))
    trimmed = []
    for j, branch in enumerate(branches):
        nodes = branch.nodes
        if j < len(shocks):
            nodes = trim_tail(branch, located[j][0], config.guard)
        if j > 0:
            nodes = trim_head(Branch(nodes, branch.chain), located[j - 1][1], config.guard)
        trimmed.append(nodes)
    branches = [Branch(nodes, build_chain(nodes, config.interp, prob, state.diagnostics))
                for nodes in trimmed]
    shocks = [_reread(shock, branches[j], branches[j + 1]) for j, shock in enumerate(shocks)]

    if merge is not None:
        j = next(k for k, s in enumerate(shocks) if s.id == merge[0])
        if j + 1 >= len(shocks) or shocks[j + 1].id != merge[1]:
            raise SolverError(f'shocks {merge[0]} and {merge[1]} are no longer adjacent',
                              t=t_new, step=state.step)
        merged = merge_shocks(shocks[j], shocks[j + 1])
        del branches[j + 1]
        shocks[j:j + 2] = [_reread(replace(merged, right_anchor=shocks[j + 1].right_anchor),
                                   branches[j], branches[j + 1])]
        state.diagnostics['merges'] += 1

    for shock in shocks:
        if not shock.u_left > shock.u_right:
            logging.warning('shock %d at x=%.12g is not entropy admissible (%.9g <= %.9g)',
                            shock.id, shock.x_star, shock.u_left, shock.u_right)
    state.diagnostics['births'] += next_id - state.next_id
    state.next_id = next_id
    if retained:
        state.last_retained = state.step
        state.boundary_kept += 1
    state.branches = branches
    state.shocks = shocks


def _reread(shock, left, right):
    """Shock with its branches attached and its states read at its position."""
    region = overlap_region(left.chain, right.chain,
                            resolve_anchor(left.chain, shock.left_anchor),
                            resolve_anchor(right.chain, shock.right_anchor))
    u_left, u_right = shock_states(shock.x_star, left.chain, right.chain, region,
                                   tol=1e-9 * max(1.0, abs(shock.x_star)))
    return replace(shock, u_left=u_left, u_right=u_right, left_branch=left, right_branch=right)


def _window(chain, S_lo, S_hi, x_lo, x_hi):
    """Positions of x_lo and x_hi inside the window [S_lo, S_hi]."""
    def at(x, side):
        x = min(max(x, float(chain.point_at(S_lo)[0])), float(chain.point_at(S_hi)[0]))
        k, t, _ = invert_x(chain, x, S_lo, S_hi, side=side)
        return k + t
    return at(x_lo, 'left'), at(x_hi, 'right')


def pieces(state):
    """
    Single-valued portions of the solution in x order, clipped to the domain
    """
    x_min, x_max = state.problem.domain
    spans = []
    if state.mode == 'equal_area':
        chain = state.branches[0].chain
        bounds = [0.0] + [S for s in state.shocks for S in (s.S1, s.S2)] + [float(len(chain))]
        for S_lo, S_hi in zip(bounds[::2], bounds[1::2]):
            spans.append((chain, S_lo, S_hi, None, None))
    else:
        for i, branch in enumerate(state.branches):
            chain = branch.chain
            if not len(chain):
                continue
            left = state.shocks[i - 1] if i > 0 else None
            right = state.shocks[i] if i < len(state.shocks) else None
            S_hi = resolve_anchor(chain, right.left_anchor) if right else None
            S_lo = resolve_anchor(chain, left.right_anchor) if left else None
            ref = S_hi if S_hi is not None else (S_lo if S_lo is not None else float(len(chain)))
            try:
                run = chain.increasing_run(ref)
            except NonMonotoneError as err:
                raise SolverError(f'branch {i} is overturned: {err}', t=state.t) from err
            spans.append((chain, run[0], run[1],
                          left.x_star if left else None, right.x_star if right else None))
    found = []
    for chain, S_lo, S_hi, x_left, x_right in spans:
        x_lo = float(chain.point_at(S_lo)[0]) if x_left is None else x_left
        x_hi = float(chain.point_at(S_hi)[0]) if x_right is None else x_right
        x_lo, x_hi = max(x_lo, x_min), min(x_hi, x_max)
        if not x_hi > x_lo:
            continue
        a, b = _window(chain, S_lo, S_hi, x_lo, x_hi)
        found.append(SolutionPiece(x_lo, x_hi, chain, a, b))
    return found


def _values_at(state, found, x, scale):
    """Heights at x: both states of a shock sitting at x, else the covering piece."""
    tol = AT_SHOCK_TOL * scale
    for shock in state.shocks:
        if abs(shock.x_star - x) <= tol:
            return [shock.u_left, shock.u_right]
    values = []
    for piece in found:
        if piece.x_lo - tol <= x <= piece.x_hi + tol:
            z = min(max(x, piece.x_lo), piece.x_hi)
            try:
                values.append(invert_x(piece.chain, z, piece.S_lo, piece.S_hi)[2])
            except InversionError:
                lo = float(piece.chain.point_at(piece.S_lo)[0])
                S = piece.S_lo if abs(z - lo) <= abs(z - piece.x_hi) else piece.S_hi
                values.append(float(piece.chain.point_at(S)[1]))
    return values[:1]


def sample(state, xs):
    """
    Weak solution at the abscissas xs; both states are returned at a shock
    """
    xs = np.sort(np.atleast_1d(np.asarray(xs, dtype=np.float64)))
    x_min, x_max = state.problem.domain
    scale = max(1.0, abs(x_min), abs(x_max))
    outside = xs[(xs < x_min - AT_SHOCK_TOL * scale) | (xs > x_max + AT_SHOCK_TOL * scale)]
    if len(outside):
        raise SolverError(f'x={outside[0]!r} is outside the domain [{x_min}, {x_max}]',
                          t=state.t)
    found = pieces(state)
    rows = []
    for x in xs:
        values = _values_at(state, found, float(x), scale)
        if not values:
            raise SolverError(f'x={x!r} is not covered by any branch', t=state.t)
        rows.extend((float(x), u) for u in values)
    positions = tuple(s.x_star for s in state.shocks)
    return WeakSolutionSample(state.t, np.array(rows, dtype=np.float64).reshape(-1, 2),
                              positions)


def _integrate_piece(chain, S_lo, S_hi, fn):
    if fn is None:
        return chain.area_between(S_lo, S_hi)
    k1, t1 = chain.locate(S_lo)
    k2, t2 = chain.locate(S_hi)
    ends = [(k1, t1, t2)] if k1 == k2 else [(k1, t1, 1.0), (k2, 0.0, t2)]
    total = 0.0
    for k, ta, tb in ends:
        if tb <= ta:
            continue
        s = ta + 0.5 * (tb - ta) * (GAUSS_NODES + 1.0)
        pts = _bernstein(s) @ chain.control[k]
        dx = (_bernstein_prime(s) @ chain.control[k])[:, 0]
        total += 0.5 * (tb - ta) * float(np.sum(GAUSS_WEIGHTS * fn(pts[:, 0], pts[:, 1]) * dx))
    if k2 > k1 + 1:
        block = chain.control[k1 + 1:k2]
        pts = np.einsum('gi,kij->kgj', _GL_BASIS, block)
        dx = np.einsum('gi,ki->kg', _GL_BASIS_PRIME, block[:, :, 0])
        values = fn(pts[..., 0], pts[..., 1])
        total += 0.5 * float(np.sum(GAUSS_WEIGHTS * values * dx))
    return total


def integrate(state, fn=None):
    """
    Integral of fn(x, u) dx over the domain; fn=None integrates u itself
    """
    return sum(_integrate_piece(p.chain, p.S_lo, p.S_hi, fn) for p in pieces(state))


def _edge_values(state):
    x_min, x_max = state.problem.domain
    found = pieces(state)
    scale = max(1.0, abs(x_min), abs(x_max))
    lo = _values_at(state, found, x_min, scale)
    hi = _values_at(state, found, x_max, scale)
    if not lo or not hi:
        raise SolverError('domain ends are not covered by the solution', t=state.t)
    return lo[0], hi[0]


def _rates(state):
    """(F(u(x_max)) - F(u(x_min)), integral of Q) at the current time."""
    prob = state.problem
    u_lo, u_hi = _edge_values(state)
    flux = float(prob.flux(u_hi) - prob.flux(u_lo))
    if prob.homogeneous:
        return flux, 0.0
    t = state.t
    try:
        return flux, integrate(state, lambda x, u: prob.source(u, x, t))
    except ExprDomainError as err:
        # cubic overshoot can leave the source's domain between nodes
        if not state.diagnostics.get('source_undefined'):
            logging.warning('source integral undefined at t=%.9g, conservation defect '
                            'is not tracked: %s', t, err)
        state.diagnostics['source_undefined'] = state.diagnostics.get('source_undefined', 0) + 1
        return flux, float('nan')


def conservation_report(state):
    """
    Conservation defect: area(t) - area(0) + boundary outflow - source input

    Fluxes and source are accumulated with the trapezoid rule over the
    steps taken; zero up to round-off for an exact method.
    """
    defect = (integrate(state) - state.initial_area + state.flux_integral
              - state.source_integral)
    state.diagnostics['conservation_defect'] = defect
    return defect


def shock_rows(state):
    """(t, id, x, u_left, u_right) for every shock, in x order."""
    return [(state.t, s.id, s.x_star, s.u_left, s.u_right) for s in state.shocks]
