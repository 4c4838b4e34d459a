"""
charflow run
"""

import logging

import click
import numpy as np

from ..obj_utils import write_convergence, write_diagnostics, write_shocks, write_solution
from ._config import build_run_config
from ._converge import run_ladder
from ._problems import list_problems
from ._solver import advance, conservation_report, initialize, sample, shock_rows


def _run_config(config=None, problem=None, param=None, n=None, samples=None, **kwargs):
    logging.debug('--config=%s', config)
    logging.debug('--problem=%s', problem)
    logging.debug('--param=%s', param)
    return build_run_config(path=config, problem=problem, params=param,
                            n_nodes=n, samples=samples, **kwargs)


def simulate(run_config):
    """
    Advance a fresh state through every output time

    Returns the final state, the samples taken and the shock rows.
    """
    state = initialize(run_config.problem, run_config.solver_config())
    xs = np.linspace(*run_config.problem.domain, run_config.sample_count)
    samples, rows = [], []
    for t in run_config.output_times:
        advance(state, t)
        samples.append(sample(state, xs))
        rows.extend(shock_rows(state))
        logging.info('t=%g: %d shock(s)', state.t, len(state.shocks))
    conservation_report(state)
    return state, samples, rows


def run(out=None, **kwargs):
    """
    Solve one problem and write solution, shock and diagnostic tables
    """
    run_config = _run_config(out=out, **kwargs)
    state, samples, rows = simulate(run_config)
    for item in samples:
        write_solution(item, run_config.output_path)
    write_shocks(rows, run_config.output_path)
    write_diagnostics(state.diagnostics, run_config.output_path)
    logging.info('conservation defect %.3g after %d steps',
                 state.diagnostics['conservation_defect'], state.step)
    return state


def converge(out=None, levels=None, mode=None, n_jobs=None, **kwargs):
    """
    Refinement ladder for one problem; writes convergence.csv
    """
    run_config = _run_config(out=out, levels=levels, mode=mode, n_jobs=n_jobs, **kwargs)
    table, order = run_ladder(run_config.problem, run_config.solver_config(),
                              run_config.t_end, mode=run_config.mode,
                              levels=run_config.levels,
                              sample_count=run_config.sample_count,
                              n_jobs=run_config.n_jobs)
    write_convergence(table, run_config.output_path)
    click.echo(f'{run_config.problem.name} {run_config.mode} order: {order:.3f}')
    return table, order


def show_problems():
    """Print the catalog, one problem per line."""
    for name, params, description, oracle in list_problems():
        click.echo(f'{name}\t{params}\t{description}\toracle: {oracle}')
