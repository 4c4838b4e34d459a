"""
charflow converge

Refinement ladders and order estimation. Spatial ladders double the node
count, temporal ladders halve the step. Errors come from the problem's
oracle (shock positions or smooth solution); without one, consecutive levels
are compared (Richardson self-convergence).
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np
import pandas as pd

from ._config import CONVERGE_MODES
from ._errors import ConfigError, SolverError
from ._solver import advance, initialize, sample


def fit_order(h, err):
    """
    Least-squares slope of log(err) against log(h)

    Non-positive errors are skipped; NaN when fewer than two remain.
    """
    h = np.asarray(h, dtype=np.float64)
    err = np.asarray(err, dtype=np.float64)
    keep = (err > 0.0) & np.isfinite(err) & (h > 0.0)
    if keep.sum() < 2:
        return float('nan')
    slope, _ = np.polyfit(np.log(h[keep]), np.log(err[keep]), 1)
    return float(slope)


def local_orders(h, err):
    """Order between each level and the previous one; NaN for the first."""
    h = np.asarray(h, dtype=np.float64)
    err = np.asarray(err, dtype=np.float64)
    orders = np.full(len(err), np.nan)
    with np.errstate(divide='ignore', invalid='ignore'):
        orders[1:] = np.log(err[:-1] / err[1:]) / np.log(h[:-1] / h[1:])
    orders[~np.isfinite(orders)] = np.nan
    return orders


def _reference(prob):
    oracle = prob.oracle
    if oracle is not None and oracle.shocks is not None:
        return 'shocks'
    if oracle is not None and oracle.solution is not None:
        return 'solution'
    return 'richardson'


def _levels(config, mode, levels):
    if mode not in CONVERGE_MODES:
        raise ConfigError(
            f'unknown convergence mode "{mode}", choose from {", ".join(CONVERGE_MODES)}')
    if levels < 2:
        raise ConfigError(f'a convergence ladder needs at least 2 levels, got {levels}')
    if mode == 'spatial':
        return [replace(config, n_nodes=config.n_nodes * 2 ** level)
                for level in range(levels)]
    return [replace(config, dt=config.dt / 2 ** level) for level in range(levels)]


def _spacing(prob, config, mode):
    if mode == 'temporal':
        return config.dt
    return max(p.hi - p.lo for p in prob.pieces) / (config.n_nodes - 1)


def _solve(prob, config, t_end):
    state = initialize(prob, config)
    advance(state, t_end)
    logging.debug('n=%d dt=%g: %d shock(s) at t=%g, %d steps',
                  config.n_nodes, config.dt, len(state.shocks), state.t, state.step)
    return state


def _shock_error(state, expected):
    found = [s.x_star for s in state.shocks]
    if len(found) != len(expected):
        raise SolverError(
            f'expected {len(expected)} shock(s) at t={state.t:g}, found {len(found)}',
            t=state.t, step=state.step)
    if not found:
        return 0.0
    return float(np.max(np.abs(np.asarray(found) - np.asarray(expected))))


def _grid(prob, sample_count):
    return np.linspace(prob.domain[0], prob.domain[1], sample_count)


def _smooth_values(state, xs):
    """One value per abscissa; the mean of both states at a shock."""
    points = sample(state, xs).points
    _, inverse = np.unique(points[:, 0], return_inverse=True)
    return np.bincount(inverse, weights=points[:, 1]) / np.bincount(inverse)


def run_ladder(prob, config, t_end, mode='spatial', levels=5, sample_count=201, n_jobs=None):
    """
    Solve `prob` on a refinement ladder and tabulate the errors

    Levels are independent solver instances run on up to `n_jobs` threads
    (one per level by default); the table is assembled in level order.
    Returns (table, fitted order); the table has columns level, h, error,
    order (local) and reference (shocks, solution or richardson).
    """
    reference = _reference(prob)
    configs = _levels(config, mode, levels + (reference == 'richardson'))
    xs = _grid(prob, sample_count)
    logging.info('%s: %s ladder with %d levels against the %s reference',
                 prob.name, mode, levels, reference)

    if n_jobs is not None and n_jobs < 1:
        raise ConfigError(f'n_jobs must be at least 1, got {n_jobs}')
    with ThreadPoolExecutor(max_workers=n_jobs or len(configs)) as pool:
        states = list(pool.map(lambda cfg: _solve(prob, cfg, t_end), configs))

    errors, spacings, previous = [], [], None
    for level, (cfg, state) in enumerate(zip(configs, states)):
        if reference == 'shocks':
            err = _shock_error(state, prob.oracle.shocks(t_end))
        elif reference == 'solution':
            exact = prob.oracle.solution(xs, t_end)
            err = float(np.max(np.abs(_smooth_values(state, xs) - exact)))
        else:
            current = (np.array([s.x_star for s in state.shocks]) if state.shocks
                       else _smooth_values(state, xs))
            if previous is not None:
                if previous.shape != current.shape:
                    raise SolverError(
                        f'levels {level - 1} and {level} disagree on the shock count',
                        t=state.t, step=state.step)
                errors.append(float(np.max(np.abs(current - previous))))
                spacings.append(_spacing(prob, configs[level - 1], mode))
            previous = current
            continue
        errors.append(err)
        spacings.append(_spacing(prob, cfg, mode))
        logging.info('level %d: h=%.6g error=%.6g', level, spacings[-1], err)

    order = fit_order(spacings, errors)
    if np.isnan(order):
        logging.warning('%s: too few nonzero errors to fit an order', prob.name)
    table = pd.DataFrame({
        'level': np.arange(len(errors)),
        'h': spacings,
        'error': errors,
        'order': local_orders(spacings, errors),
        'reference': reference,
    })
    return table, order
