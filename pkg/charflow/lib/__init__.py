"""
Provides exported functions
"""

from ._errors import (
    CharflowError,
    ConfigError,
    CurveError,
    ExprError,
    ProjectionError,
    ShockError,
    SolverError,
)
from ._expr import parse, evaluate, check_derivative
from ._curve import BezierSegment, CurveChain
from ._problems import Problem, Piece, Boundary, get_problem, list_problems
from ._solver import (
    SolverConfig,
    initialize,
    advance,
    sample,
    integrate,
    pieces,
    conservation_report,
    shock_rows,
)
from ._config import RunConfig, build_run_config, load_config
from ._converge import fit_order, run_ladder
from ._run import run, converge, simulate, show_problems
