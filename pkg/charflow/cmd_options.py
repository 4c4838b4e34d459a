"""
Provide cmd options
"""

import click

from .click_utils import (
    CommaSeparatedText,
    Dictionary,
    valid_positive,
    valid_times,
)
from .lib._characteristics import INTERP_MODES
from .lib._config import CONVERGE_MODES, RUN_DEFAULTS
from .lib._shock import SHOCK_METHODS

COMMON_OPTIONS = {
    'problem': [
        click.option(
            '--problem', '-p',
            type=click.STRING,
            default=None,
            help='Name of a catalog problem, see "charflow list-problems". '
            'Overrides the [problem] section of --config.',
        ),
        click.option(
            '--config', '-c',
            type=click.Path(exists=True, dir_okay=False),
            default=None,
            help='INI file with [problem], [piece.<k>], [boundary] and [run] '
            'sections.',
        ),
        click.option(
            '--param',
            type=Dictionary(),
            default=None,
            help='Catalog problem parameters, in the format of "k:1.5[,name:value...]".',
        ),
    ],

    'solver': [
        click.option(
            '--n', '-n', 'n',
            type=click.INT,
            default=None,
            callback=valid_positive,
            help=f'Number of characteristic nodes per initial piece. '
            f'[default: {RUN_DEFAULTS["n_nodes"]}]',
        ),
        click.option(
            '--dt',
            type=click.FLOAT,
            default=None,
            callback=valid_positive,
            help=f'Global time step. [default: {RUN_DEFAULTS["dt"]}]',
        ),
        click.option(
            '--t-end', '-t',
            type=click.FLOAT,
            default=None,
            help=f'Final time. [default: {RUN_DEFAULTS["t_end"]}]',
        ),
        click.option(
            '--interp',
            type=click.Choice(INTERP_MODES),
            default=None,
            help=f'Interpolation of the characteristic curve. '
            f'[default: {RUN_DEFAULTS["interp"]}]',
        ),
        click.option(
            '--shock-method',
            type=click.Choice(list(SHOCK_METHODS)),
            default=None,
            help=f'Runge-Kutta method for the shock positions. '
            f'[default: {RUN_DEFAULTS["shock_method"]}]',
        ),
        click.option(
            '--samples', '-s',
            type=click.INT,
            default=None,
            callback=valid_positive,
            help=f'Number of equally spaced sample points in x. '
            f'[default: {RUN_DEFAULTS["samples"]}]',
        ),
    ],

    'output': click.option(
        '--out', '-o',
        type=click.Path(file_okay=False, writable=True),
        default=None,
        help='Directory for the CSV tables. [default: .]',
    ),
}


CMD_OPTIONS = {
    'run': [
        *COMMON_OPTIONS['problem'],
        *COMMON_OPTIONS['solver'],
        click.option(
            '--times',
            type=CommaSeparatedText(click.FLOAT),
            default=None,
            callback=valid_times,
            help='Comma separated output times; one solution table is written '
            'per time. [default: --t-end]',
        ),
        COMMON_OPTIONS['output'],
    ],

    'converge': [
        *COMMON_OPTIONS['problem'],
        *COMMON_OPTIONS['solver'],
        click.option(
            '--levels', '-l',
            type=click.INT,
            default=None,
            help=f'Number of refinement levels. [default: {RUN_DEFAULTS["levels"]}]',
        ),
        click.option(
            '--mode', '-m',
            type=click.Choice(CONVERGE_MODES),
            default=None,
            help='Refine the node spacing (spatial) or the time step (temporal). '
            f'[default: {RUN_DEFAULTS["mode"]}]',
        ),
        click.option(
            '--n-jobs', '-J',
            type=click.INT,
            default=None,
            callback=valid_positive,
            help='Number of ladder levels solved in parallel. [default: one per level]',
        ),
        COMMON_OPTIONS['output'],
    ],

    'list_problems': [],
}
