"""
Provide helper functions for writing result tables
"""

import os

import pandas as pd

FLOAT_FORMAT = '%.17g'

SOLUTION_COLUMNS = ['x', 'u']
SHOCK_COLUMNS = ['t', 'id', 'x', 'u_left', 'u_right']
CONVERGENCE_COLUMNS = ['level', 'h', 'error', 'order', 'reference']


def write_table(df, fname, columns, sep=','):
    """Write the given columns of a data frame as CSV, 17 significant digits
    """
    for key in columns:
        if key not in df.columns:
            raise KeyError(f'{key} is not a column of the table for {fname}')
    dirname = os.path.dirname(fname)
    if dirname:
        os.makedirs(dirname, exist_ok=True)
    df[columns].to_csv(fname, sep=sep, header=True, index=False,
                       float_format=FLOAT_FORMAT)
    return fname


def solution_fname(out, t):
    return os.path.join(out, f'solution_t{t:g}.csv')


def write_solution(sample, out):
    """Export a weak-solution sample as solution_t<t>.csv
    """
    df = pd.DataFrame(sample.points, columns=SOLUTION_COLUMNS)
    return write_table(df, solution_fname(out, sample.t), SOLUTION_COLUMNS)


def write_shocks(rows, out):
    """Export shock rows (t, id, x, u_left, u_right) as shocks.csv
    """
    df = pd.DataFrame(list(rows), columns=SHOCK_COLUMNS).astype({'id': int})
    return write_table(df, os.path.join(out, 'shocks.csv'), SHOCK_COLUMNS)


def write_diagnostics(diagnostics, out):
    df = pd.DataFrame({'key': list(diagnostics), 'value': list(diagnostics.values())})
    return write_table(df, os.path.join(out, 'diagnostics.csv'), ['key', 'value'])


def write_convergence(table, out):
    return write_table(table, os.path.join(out, 'convergence.csv'), CONVERGENCE_COLUMNS)
