"""
Provides sub-commands
"""

from .cmd_utils import make_subcmd
from .lib._run import converge, run, show_problems

_P_DESC = 'Problem from --problem (catalog name) or --config (INI file).'
_O_DESC = '<out>/solution_t<t>.csv, <out>/shocks.csv and <out>/diagnostics.csv'
_C_DESC = '<out>/convergence.csv with columns level, h, error, order, reference'


RUN_CMD = make_subcmd(
    'run',
    run,
    cmd_desc='Solve a scalar conservation law and write the weak solution.',
    arg_desc='\n'.join([_P_DESC, _O_DESC]),
)


CONVERGE_CMD = make_subcmd(
    'converge',
    converge,
    cmd_desc='Run a refinement ladder and fit the order of convergence.',
    arg_desc='\n'.join([_P_DESC, _C_DESC]),
)


LIST_PROBLEMS_CMD = make_subcmd(
    'list_problems',
    show_problems,
    cmd_desc='List the built-in problems with their parameters and oracles.',
    arg_desc='Columns: name, parameters, description, oracle.',
)
