"""
charflow config

Run configuration from an INI file and command-line values. A file has a
[problem] section (a catalog name plus parameters, or an inline definition),
optional [piece.<k>] and [boundary] sections for inline problems and a [run]
section. Command-line values win over the file, the file over the defaults.
"""

import configparser
import logging
from dataclasses import dataclass, field

from ._errors import ConfigError, ExprError
from ._expr import constant_value
from ._problems import Boundary, Piece, Problem, get_problem, validate_problem
from ._solver import SolverConfig

RUN_DEFAULTS = {
    'n_nodes': 80,
    'dt': 0.01,
    't_end': 1.0,
    'interp': 'area_preserving',
    'shock_method': 'rk4',
    'samples': 201,
    'times': None,
    'out': '.',
    'levels': 5,
    'mode': 'spatial',
    'area_subdivisions': 10,
    'connector_count': None,
    'guard': 2,
    'boundary_stride': None,
    'n_jobs': None,
}

_INTEGER_KEYS = ('n_nodes', 'samples', 'levels', 'area_subdivisions', 'connector_count',
                 'guard', 'boundary_stride', 'n_jobs')
_REAL_KEYS = ('dt', 't_end')
_TEXT_KEYS = ('interp', 'shock_method', 'out', 'mode')
_PROBLEM_KEYS = ('F', 'dF', 'd2F', 'Q', 'dQ_du', 'dQ_dx')
CONVERGE_MODES = ('spatial', 'temporal')


@dataclass(frozen=True)
class RunConfig:
    """Problem plus every run parameter, already validated."""
    problem: Problem
    n_nodes: int = 80
    dt: float = 0.01
    t_end: float = 1.0
    interp: str = 'area_preserving'
    shock_method: str = 'rk4'
    sample_count: int = 201
    output_path: str = '.'
    times: tuple = ()
    levels: int = 5
    mode: str = 'spatial'
    area_subdivisions: int = 10
    connector_count: int = None
    guard: int = 2
    boundary_stride: int = None
    n_jobs: int = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.t_end < 0.0:
            raise ConfigError(f't_end must not be negative, got {self.t_end}')
        if self.sample_count < 2:
            raise ConfigError(f'need at least 2 samples, got {self.sample_count}')
        if self.levels < 2:
            raise ConfigError(f'a convergence ladder needs at least 2 levels, got {self.levels}')
        if self.mode not in CONVERGE_MODES:
            raise ConfigError(
                f'unknown convergence mode "{self.mode}", choose from {", ".join(CONVERGE_MODES)}')
        if any(t < 0.0 for t in self.times):
            raise ConfigError(f'output times must not be negative: {self.times}')
        if self.n_jobs is not None and self.n_jobs < 1:
            raise ConfigError(f'n_jobs must be at least 1, got {self.n_jobs}')
        # validates n_nodes, dt, interp and the rest
        self.solver_config()

    def solver_config(self):
        return SolverConfig(
            n_nodes=self.n_nodes, dt=self.dt, interp=self.interp,
            shock_method=self.shock_method, area_subdivisions=self.area_subdivisions,
            guard=self.guard, connector_count=self.connector_count,
            boundary_stride=self.boundary_stride)

    @property
    def output_times(self):
        return tuple(sorted(set(self.times))) if self.times else (self.t_end,)


def _unquote(value):
    value = value.strip()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in '"\'':
        return value[1:-1]
    return value


def _number(section, key, value):
    try:
        return constant_value(_unquote(str(value)))
    except ExprError as err:
        raise ConfigError(f'[{section}] {key}: {err}') from err


def _integer(section, key, value):
    number = _number(section, key, value)
    if number != int(number):
        raise ConfigError(f'[{section}] {key}: expected an integer, got {value}')
    return int(number)


def read_config(path):
    """Parse an INI file; syntax errors carry the line number."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as err:
        raise ConfigError(f'cannot read config {path}: {err}') from err
    except configparser.Error as err:
        raise ConfigError(f'{path}: {err}') from err
    return parser


def _run_section(parser):
    values = {}
    if not parser.has_section('run'):
        return values
    for key, raw in parser.items('run'):
        key = key.replace('-', '_')
        if key in _INTEGER_KEYS:
            values[key] = _integer('run', key, raw)
        elif key in _REAL_KEYS:
            values[key] = _number('run', key, raw)
        elif key in _TEXT_KEYS:
            values[key] = _unquote(raw)
        elif key == 'times':
            values[key] = tuple(_number('run', key, t) for t in _unquote(raw).split(','))
        else:
            raise ConfigError(f'[run] {key}: unknown setting')
    return values


def _inline_problem(parser, section):
    name = _unquote(section.get('name', 'custom'))
    missing = [key for key in ('F', 'dF', 'd2F', 'domain') if key not in section]
    if missing:
        raise ConfigError(f'[problem] missing {", ".join(missing)} for an inline problem')
    domain = tuple(_number('problem', 'domain', v) for v in _unquote(section['domain']).split(','))
    if len(domain) != 2:
        raise ConfigError(f'[problem] domain: expected "x_min, x_max", got {section["domain"]}')
    labels = sorted((s for s in parser.sections() if s.startswith('piece.')),
                    key=lambda s: _integer(s, 'index', s.partition('.')[2]))
    if not labels:
        raise ConfigError('an inline problem needs at least one [piece.<k>] section')
    pieces = []
    for label in labels:
        piece = parser[label]
        for key in ('lo', 'hi', 'g', 'dg'):
            if key not in piece:
                raise ConfigError(f'[{label}] missing {key}')
        try:
            pieces.append(Piece(_number(label, 'lo', piece['lo']),
                                _number(label, 'hi', piece['hi']),
                                _unquote(piece['g']), _unquote(piece['dg'])))
        except ExprError as err:
            raise ConfigError(f'[{label}] {err}') from err
    boundary = None
    if parser.has_section('boundary'):
        if 'value' not in parser['boundary']:
            raise ConfigError('[boundary] missing value')
        stride = parser['boundary'].get('stride')
        boundary = Boundary(_number('boundary', 'value', parser['boundary']['value']),
                            None if stride is None else _integer('boundary', 'stride', stride))
    exprs = {key: _unquote(section[key]) for key in _PROBLEM_KEYS if key in section}
    try:
        problem = Problem(name=name, pieces=pieces, domain=domain, boundary=boundary,
                          description=_unquote(section.get('description', '')), **exprs)
    except ExprError as err:
        raise ConfigError(f'[problem] {err}') from err
    return validate_problem(problem)


def _problem_from(parser, name=None, params=None):
    section = parser['problem'] if parser is not None and parser.has_section('problem') else {}
    inline = any(key in section for key in _PROBLEM_KEYS)
    if name is None and inline:
        return _inline_problem(parser, section)
    name = name or (_unquote(section['name']) if 'name' in section else None)
    if name is None:
        raise ConfigError('no problem given: use --problem or a [problem] section')
    skip = ('name', 'domain', 'description') + _PROBLEM_KEYS
    values = {key: _unquote(val) for key, val in section.items() if key not in skip}
    values.update(params or {})
    return get_problem(name, **values)


def build_run_config(path=None, problem=None, params=None, **cli_values):
    """
    RunConfig from defaults, an optional INI file and command-line values
    """
    parser = read_config(path) if path else None
    values = dict(RUN_DEFAULTS)
    if parser is not None:
        values.update(_run_section(parser))
    values.update({key: val for key, val in cli_values.items() if val is not None})
    unknown = set(values) - set(RUN_DEFAULTS)
    if unknown:
        raise ConfigError(f'unknown run setting(s): {", ".join(sorted(unknown))}')
    params = {key: val if isinstance(val, str) else float(val)
              for key, val in (params or {}).items()}
    prob = _problem_from(parser, problem, params)
    logging.debug('problem=%s params=%s run=%s', prob.name, prob.params, values)
    return RunConfig(
        problem=prob,
        n_nodes=int(values['n_nodes']),
        dt=float(values['dt']),
        t_end=float(values['t_end']),
        interp=values['interp'],
        shock_method=values['shock_method'],
        sample_count=int(values['samples']),
        output_path=values['out'],
        times=tuple(float(t) for t in values['times'] or ()),
        levels=int(values['levels']),
        mode=values['mode'],
        area_subdivisions=int(values['area_subdivisions']),
        connector_count=values['connector_count'],
        guard=int(values['guard']),
        boundary_stride=values['boundary_stride'],
        n_jobs=values['n_jobs'],
        params=dict(prob.params),
    )


def load_config(path):
    """RunConfig described entirely by an INI file."""
    return build_run_config(path)
