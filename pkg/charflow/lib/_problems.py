"""
charflow problems

Problem definition (flux, source, piecewise initial data, inflow boundary),
load-time checks and the built-in catalog with its oracles.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp

from ._errors import ConfigError, ExprDomainError, ExprError
from ._expr import as_expr, check_derivative, constant_value, evaluate

JUMP_TOL = 1e-12
DERIVATIVE_TOL = 1e-6


@dataclass(frozen=True)
class Piece:
    """Smooth initial data g on [lo, hi] with derivative dg."""
    lo: float
    hi: float
    g: object
    dg: object

    def __post_init__(self):
        object.__setattr__(self, 'g', as_expr(self.g))
        object.__setattr__(self, 'dg', as_expr(self.dg))

    def value(self, x0):
        return _broadcast(evaluate(self.g, {'x': x0, 'x0': x0}), x0)

    def slope(self, x0):
        return _broadcast(evaluate(self.dg, {'x': x0, 'x0': x0}), x0)


@dataclass(frozen=True)
class Boundary:
    """Constant inflow value imposed at the left end of the domain."""
    value: float
    stride: int = None


@dataclass(frozen=True)
class Oracle:
    """
    Reference data for a catalog problem

    `shocks(t)` returns the exact shock positions at t (sorted);
    `solution(x, t)` the exact smooth solution. Either may be None.
    """
    description: str
    shocks: object = None
    solution: object = None
    path: object = None


@dataclass(frozen=True)
class Problem:
    """
    Scalar balance law u_t + F(u)_x = Q(u, x, t) with piecewise initial data
    """
    name: str
    F: object
    dF: object
    d2F: object
    pieces: tuple
    domain: tuple
    Q: object = '0'
    dQ_du: object = '0'
    dQ_dx: object = '0'
    boundary: Boundary = None
    params: dict = field(default_factory=dict)
    description: str = ''
    oracle: Oracle = None

    def __post_init__(self):
        for name in ('F', 'dF', 'd2F', 'Q', 'dQ_du', 'dQ_dx'):
            object.__setattr__(self, name, as_expr(getattr(self, name)))
        object.__setattr__(self, 'pieces', tuple(self.pieces))
        object.__setattr__(self, 'domain', (float(self.domain[0]), float(self.domain[1])))

    @property
    def homogeneous(self):
        return not self.Q.variables() and evaluate(self.Q) == 0.0

    def flux(self, u):
        return _broadcast(evaluate(self.F, {'u': u}), u)

    def speed(self, u):
        return _broadcast(evaluate(self.dF, {'u': u}), u)

    def flux_curvature(self, u):
        return _broadcast(evaluate(self.d2F, {'u': u}), u)

    def source(self, u, x, t):
        return _broadcast(evaluate(self.Q, {'u': u, 'x': x, 't': t}), u)

    def source_u(self, u, x, t):
        return _broadcast(evaluate(self.dQ_du, {'u': u, 'x': x, 't': t}), u)

    def source_x(self, u, x, t):
        return _broadcast(evaluate(self.dQ_dx, {'u': u, 'x': x, 't': t}), u)

    def piece_at(self, x0):
        for piece in self.pieces:
            if piece.lo <= x0 <= piece.hi:
                return piece
        raise ConfigError(f'x0={x0!r} is outside the initial data')

    def initial_value(self, x0):
        return float(self.piece_at(x0).value(x0))

    @property
    def jumps(self):
        """(x, u_minus, u_plus) at interior piece boundaries with a real jump."""
        found = []
        for left, right in zip(self.pieces[:-1], self.pieces[1:]):
            u_minus = float(left.value(left.hi))
            u_plus = float(right.value(right.lo))
            if abs(u_minus - u_plus) > JUMP_TOL * (1.0 + abs(u_minus)):
                found.append((left.hi, u_minus, u_plus))
        return found

    def initial_area(self):
        """Integral of the initial data over the domain."""
        lo, hi = self.domain
        total = 0.0
        for piece in self.pieces:
            a, b = max(piece.lo, lo), min(piece.hi, hi)
            if b > a:
                total += quad(lambda s: float(piece.value(s)), a, b,
                              epsabs=1e-12, epsrel=1e-12, limit=200)[0]
        return total

    def value_range(self):
        """Sampled (min, max) of the initial data, boundary value included."""
        values = []
        for piece in self.pieces:
            values.append(piece.value(np.linspace(piece.lo, piece.hi, 65)))
        if self.boundary is not None:
            values.append(np.array([self.boundary.value]))
        values = np.concatenate([np.atleast_1d(v) for v in values])
        return float(values.min()), float(values.max())


def _broadcast(value, like):
    like = np.asarray(like)
    if like.ndim == 0:
        return float(value)
    return np.broadcast_to(value, like.shape).astype(np.float64)


def validate_problem(problem, n_points=100, seed=0):
    """
    Load-time checks: tiling, convexity and derivative consistency

    Raises ConfigError naming the offending function.
    """
    pieces = problem.pieces
    if not pieces:
        raise ConfigError(f'{problem.name}: no initial data pieces')
    for piece in pieces:
        if not piece.hi > piece.lo:
            raise ConfigError(f'{problem.name}: empty piece [{piece.lo}, {piece.hi}]')
    for left, right in zip(pieces[:-1], pieces[1:]):
        if abs(left.hi - right.lo) > JUMP_TOL * (1.0 + abs(left.hi)):
            raise ConfigError(
                f'{problem.name}: pieces must tile without gaps, '
                f'[{left.lo}, {left.hi}] is followed by [{right.lo}, {right.hi}]')
    x_min, x_max = problem.domain
    if not x_max > x_min:
        raise ConfigError(f'{problem.name}: empty domain {problem.domain}')
    if x_min < pieces[0].lo - JUMP_TOL or x_max > pieces[-1].hi + JUMP_TOL:
        raise ConfigError(f'{problem.name}: initial data do not cover the domain')

    rng = np.random.default_rng(seed)
    try:
        u_lo, u_hi = problem.value_range()
        pad = 0.1 * (u_hi - u_lo)
        us = rng.uniform(u_lo + pad, u_hi - pad, n_points) if u_hi > u_lo else np.full(n_points, u_lo)
        curvature = problem.flux_curvature(np.linspace(u_lo, u_hi, 201))
        if np.any(curvature <= 0.0):
            raise ConfigError(f'{problem.name}: flux is not uniformly convex on [{u_lo}, {u_hi}]')
        _check(problem, 'dF', problem.F, problem.dF, 'u', us)
        _check(problem, 'd2F', problem.dF, problem.d2F, 'u', us)
        if not problem.homogeneous:
            xs = rng.uniform(x_min, x_max, n_points)
            ts = rng.uniform(0.0, 1.0, n_points)
            _check(problem, 'dQ_du', problem.Q, problem.dQ_du, 'u', us, {'x': xs, 't': ts})
            _check(problem, 'dQ_dx', problem.Q, problem.dQ_dx, 'x', xs, {'u': us, 't': ts})
        for piece in pieces:
            x0 = rng.uniform(piece.lo, piece.hi, n_points // 4 + 1)
            _check(problem, f"dg on [{piece.lo}, {piece.hi}]", piece.g, piece.dg, None, x0)
    except (ExprDomainError, ExprError) as err:
        raise ConfigError(f'{problem.name}: {err}') from err
    if problem.boundary is not None:
        speed = problem.speed(problem.boundary.value)
        if speed <= 0.0:
            raise ConfigError(
                f'{problem.name}: boundary value {problem.boundary.value} is not inflow '
                f"(F'(u_b)={speed})")
        if abs(pieces[0].lo - x_min) > JUMP_TOL * (1.0 + abs(x_min)):
            raise ConfigError(
                f'{problem.name}: with an inflow boundary the initial data must start at '
                f'x_min={x_min}')
        inside = problem.initial_value(x_min)
        if problem.boundary.value < inside - JUMP_TOL * (1.0 + abs(inside)):
            raise ConfigError(
                f'{problem.name}: boundary value {problem.boundary.value} below the initial '
                f'value {inside} opens a rarefaction at the boundary')
        if problem.boundary.stride is not None and problem.boundary.stride < 1:
            raise ConfigError(f'{problem.name}: boundary stride must be at least 1')
    return problem


def _check(problem, label, f, df, var, points, bindings=None):
    if var is None:
        error = _check_total(f, df, points, bindings or {})
    else:
        error = check_derivative(f, df, var, points, bindings)
    logging.debug('%s: derivative check %s error=%.3g', problem.name, label, error)
    if error > DERIVATIVE_TOL:
        raise ConfigError(
            f'{problem.name}: {label} is inconsistent with its antiderivative '
            f'(scaled error {error:.3g})')


def _check_total(f, df, points, bindings):
    h = 1e-6 * np.maximum(1.0, np.abs(points))
    plus = evaluate(f, {**bindings, 'x': points + h, 'x0': points + h})
    minus = evaluate(f, {**bindings, 'x': points - h, 'x0': points - h})
    exact = evaluate(df, {**bindings, 'x': points, 'x0': points})
    scale = np.maximum(1.0, np.abs(exact))
    return float(np.max(np.abs((plus - minus) / (2.0 * h) - exact) / scale))


def _burgers(**kwargs):
    return {'F': 'u^2/2', 'dF': 'u', 'd2F': '1', **kwargs}


def _sine_burgers():
    def shocks(t):
        if t < 1.0:
            return []
        return [float(np.arccos((t - 2.0) / t) + 2.0 * np.sqrt(t - 1.0))]

    def states(t):
        return 2.0 * np.sqrt(t - 1.0) / t, 0.0

    return Problem(
        name='sine-burgers',
        pieces=(Piece(0.0, np.pi, 'sin(x)', 'cos(x)'),
                Piece(np.pi, 2.0 * np.pi, '0', '0')),
        domain=(0.0, 2.0 * np.pi),
        description='Burgers flux, sine bump on [0, pi]; shock forms at t=1',
        oracle=Oracle('analytic shock position arccos((t-2)/t)+2*sqrt(t-1) for t >= 1',
                      shocks=shocks, solution=None, path=states),
        **_burgers(),
    )


def _box_logistic(k=1.0):
    k = float(k)
    if k < 1.0:
        raise ConfigError(f'box-logistic-k: k must be at least 1, got {k}')
    return Problem(
        name='box-logistic-k',
        Q=f'-(u*(1-u))^{k!r}',
        dQ_du=f'-{k!r}*(u*(1-u))^({k!r}-1)*(1-2*u)',
        dQ_dx='0',
        pieces=(Piece(-1.0, 0.0, '0', '0'),
                Piece(0.0, 1.0, '1', '0'),
                Piece(1.0, 4.0, '0', '0')),
        domain=(-1.0, 4.0),
        params={'k': k},
        description='Burgers flux, unit box, logistic-type source -(u(1-u))^k',
        oracle=Oracle('none (qualitative: the shock moves at speed 1/2 for any k)'),
        **_burgers(),
    )


def _particle_path_x(t):
    theta = np.sqrt(5.0) * np.asarray(t, dtype=np.float64) / 4.0
    branch = np.floor((theta + np.pi / 2.0) / np.pi)
    return 2.0 * (np.arctan(np.tan(theta) / np.sqrt(5.0)) + branch * np.pi)


def _particle_path():
    return Problem(
        name='particle-path',
        Q='sin(x)*u',
        dQ_du='sin(x)',
        dQ_dx='cos(x)*u',
        pieces=(Piece(0.0, 2.0 * np.pi, '3/2-cos(x)', 'sin(x)'),),
        domain=(0.0, 2.0 * np.pi),
        boundary=Boundary(0.5),
        description='Burgers flux, source sin(x)u, steady curve u=3/2-cos(x)',
        oracle=Oracle('analytic steady curve u=3/2-cos(x); particle path of x0=0 '
                      'x(t)=2*arctan(tan(sqrt(5)t/4)/sqrt(5)) (branch corrected)',
                      solution=lambda x, t: 1.5 - np.cos(x),
                      path=_particle_path_x),
        **_burgers(),
    )


def _collision_shocks(t):
    e_t = np.exp(t)
    t_star = COLLISION_TIME
    if t < t_star:
        x1 = 2.0 + t + 0.5 * (np.log(20.0 / 9.0) - np.log((1.0 + e_t / 9.0) * (1.0 + e_t)))
        x2 = 2.5 + t + 0.5 * (np.log(10.0) - np.log((1.0 + e_t) * (1.0 + 4.0 * e_t)))
        return [float(x1), float(x2)]
    e_s = np.exp(t_star)
    x_c = 2.0 + t_star + 0.5 * (np.log(20.0 / 9.0)
                                - np.log((1.0 + e_s / 9.0) * (1.0 + e_s)))
    x = x_c + 0.5 * (2.0 * (t - t_star)
                     - np.log((1.0 + e_t / 9.0) / (1.0 + e_s / 9.0))
                     - np.log((1.0 + 4.0 * e_t) / (1.0 + 4.0 * e_s)))
    return [float(x)]


COLLISION_TIME = float(np.log((9.0 * np.e - 2.0) / (8.0 - np.e)))


def _three_state_collision():
    def states(t):
        e_t = np.exp(t)
        return 1.0 / (1.0 + e_t / 9.0), 1.0 / (1.0 + e_t), 1.0 / (1.0 + 4.0 * e_t)

    return Problem(
        name='three-state-collision',
        Q='-u*(1-u)',
        dQ_du='2*u-1',
        dQ_dx='0',
        pieces=(Piece(-3.0, 2.0, '0.9', '0'),
                Piece(2.0, 2.5, '0.5', '0'),
                Piece(2.5, 7.0, '0.2', '0')),
        domain=(0.0, 5.0),
        description='Burgers flux, source -u(1-u); two shocks collide at t~1.44769',
        oracle=Oracle('analytic shock positions from logistic states; collision at '
                      't=ln((9e-2)/(8-e))', shocks=_collision_shocks, path=states),
        **_burgers(),
    )


def sine_source_shock_x(t):
    theta = np.sqrt(5.0) * np.asarray(t, dtype=np.float64) / 8.0
    branch = np.floor((theta + np.pi / 2.0) / np.pi)
    return 2.0 * (np.arctan(np.tan(theta) / np.sqrt(5.0)) + branch * np.pi)


def sine_source_shock_ode(t, rtol=1e-12, atol=1e-14):
    """Shock position from a high-accuracy solve of dx/dt = (3 - 2cos x)/4."""
    if t == 0.0:
        return 0.0
    sol = solve_ivp(lambda s, x: (3.0 - 2.0 * np.cos(x)) / 4.0, (0.0, t), [0.0],
                    method='DOP853', rtol=rtol, atol=atol)
    return float(sol.y[0, -1])


def _sine_source_shock():
    return Problem(
        name='sine-source-shock',
        Q='sin(x)*u',
        dQ_du='sin(x)',
        dQ_dx='cos(x)*u',
        pieces=(Piece(0.0, 4.0, '0', '0'),),
        domain=(0.0, 4.0),
        boundary=Boundary(0.5),
        description='Burgers flux, source sin(x)u, inflow u=1/2 into u=0',
        oracle=Oracle('derived: dx/dt=(3-2cos x)/4, '
                      'x(t)=2*arctan(tan(sqrt(5)t/8)/sqrt(5)), checked against solve_ivp',
                      shocks=lambda t: [float(sine_source_shock_x(t))]),
        **_burgers(),
    )


CATALOG = {
    'sine-burgers': (_sine_burgers, {}),
    'box-logistic-k': (_box_logistic, {'k': 1.0}),
    'particle-path': (_particle_path, {}),
    'three-state-collision': (_three_state_collision, {}),
    'sine-source-shock': (_sine_source_shock, {}),
}


def get_problem(name, **params):
    """
    Build a catalog problem by name; parameter values may be expressions
    """
    if name not in CATALOG:
        raise ConfigError(
            f'unknown problem "{name}", choose from {", ".join(CATALOG)}')
    factory, defaults = CATALOG[name]
    unknown = set(params) - set(defaults)
    if unknown:
        raise ConfigError(f'{name}: unknown parameter(s) {", ".join(sorted(unknown))}')
    values = {key: constant_value(str(val)) if isinstance(val, str) else val
              for key, val in {**defaults, **params}.items()}
    return validate_problem(factory(**values))


def list_problems():
    """(name, parameters, description, oracle) rows of the catalog."""
    rows = []
    for name, (factory, defaults) in CATALOG.items():
        problem = factory(**defaults)
        params = ', '.join(f'{k}={v:g}' for k, v in defaults.items()) or '-'
        rows.append((name, params, problem.description, problem.oracle.description))
    return rows
