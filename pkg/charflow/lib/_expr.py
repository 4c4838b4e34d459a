"""
charflow expressions

Small recursive-descent arithmetic language used to describe flux, source and
initial-condition functions in problem configs.

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' unary)?
    atom  := NUMBER | CONST | VAR | FUNC '(' expr ')' | '(' expr ')'
"""

import logging
import re
from dataclasses import dataclass

import numpy as np

from ._errors import (
    ExprDomainError,
    ExprSyntaxError,
    UnboundVariableError,
    UnknownIdentifierError,
)

VARIABLES = ('u', 'x', 't', 'x0')

CONSTANTS = {
    'pi': np.pi,
    'e': np.e,
}

FUNCTIONS = {
    'sin': np.sin,
    'cos': np.cos,
    'tan': np.tan,
    'exp': np.exp,
    'ln': np.log,
    'sqrt': np.sqrt,
    'abs': np.abs,
    'arctan': np.arctan,
    'arccos': np.arccos,
}

_BINARY = {
    '+': np.add,
    '-': np.subtract,
    '*': np.multiply,
    '/': np.divide,
    '^': np.power,
}

_TOKEN_RE = re.compile(r'''
    (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
  | (?P<space>\s+)
''', re.VERBOSE)


class Expr:
    """Base class of the immutable expression tree."""

    def evaluate(self, env):
        raise NotImplementedError

    def variables(self):
        return frozenset()

    def __call__(self, **bindings):
        return evaluate(self, bindings)


@dataclass(frozen=True)
class Num(Expr):
    value: float

    def evaluate(self, env):
        return np.float64(self.value)

    def __str__(self):
        text = repr(float(self.value))
        return f'({text})' if self.value < 0 else text


@dataclass(frozen=True)
class Const(Expr):
    name: str

    def evaluate(self, env):
        return np.float64(CONSTANTS[self.name])

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def evaluate(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise UnboundVariableError(
                f'variable "{self.name}" is not bound') from None

    def variables(self):
        return frozenset([self.name])

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr

    def evaluate(self, env):
        return np.negative(self.operand.evaluate(env))

    def variables(self):
        return self.operand.variables()

    def __str__(self):
        return f'(-{self.operand})'


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def evaluate(self, env):
        return _BINARY[self.op](self.left.evaluate(env), self.right.evaluate(env))

    def variables(self):
        return self.left.variables() | self.right.variables()

    def __str__(self):
        return f'({self.left} {self.op} {self.right})'


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr

    def evaluate(self, env):
        return FUNCTIONS[self.func](self.arg.evaluate(env))

    def variables(self):
        return self.arg.variables()

    def __str__(self):
        return f'{self.func}({self.arg})'


def _tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ExprSyntaxError(
                f'unexpected character {source[pos]!r}', _byte_offset(source, pos))
        kind = match.lastgroup
        if kind != 'space':
            tokens.append((kind, match.group(kind), _byte_offset(source, pos)))
        pos = match.end()
    tokens.append(('end', '', _byte_offset(source, len(source))))
    return tokens


def _byte_offset(source, pos):
    return len(source[:pos].encode('utf-8'))


class _Parser:

    def __init__(self, source):
        self.tokens = _tokenize(source)
        self.index = 0

    @property
    def current(self):
        return self.tokens[self.index]

    def _advance(self):
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _expect(self, value):
        kind, text, offset = self.current
        if kind != 'op' or text != value:
            found = text if kind != 'end' else 'end of input'
            raise ExprSyntaxError(f'expected "{value}" but found "{found}"', offset)
        return self._advance()

    def parse(self):
        tree = self._expr()
        kind, text, offset = self.current
        if kind != 'end':
            raise ExprSyntaxError(f'unexpected "{text}"', offset)
        return tree

    def _expr(self):
        node = self._term()
        while self.current[0] == 'op' and self.current[1] in '+-':
            op = self._advance()[1]
            node = BinOp(op, node, self._term())
        return node

    def _term(self):
        node = self._unary()
        while self.current[0] == 'op' and self.current[1] in '*/':
            op = self._advance()[1]
            node = BinOp(op, node, self._unary())
        return node

    def _unary(self):
        if self.current[0] == 'op' and self.current[1] == '-':
            self._advance()
            return Neg(self._unary())
        return self._power()

    def _power(self):
        base = self._atom()
        if self.current[0] == 'op' and self.current[1] == '^':
            self._advance()
            # right operand goes back through unary, so 2^3^2 == 2^(3^2)
            return BinOp('^', base, self._unary())
        return base

    def _atom(self):
        kind, text, offset = self._advance()
        if kind == 'num':
            return Num(float(text))
        if kind == 'name':
            if text in FUNCTIONS:
                self._expect('(')
                arg = self._expr()
                self._expect(')')
                return Call(text, arg)
            if self.current[0] == 'op' and self.current[1] == '(':
                raise UnknownIdentifierError(
                    f'unknown function "{text}" at offset {offset}')
            if text in CONSTANTS:
                return Const(text)
            if text in VARIABLES:
                return Var(text)
            raise UnknownIdentifierError(
                f'unknown identifier "{text}" at offset {offset}')
        if kind == 'op' and text == '(':
            node = self._expr()
            self._expect(')')
            return node
        found = text if kind != 'end' else 'end of input'
        raise ExprSyntaxError(f'unexpected "{found}"', offset)


def parse(source):
    """
    Parse `source` into an immutable expression tree
    """
    if isinstance(source, bytes):
        source = source.decode('utf-8')
    source = str(source).strip()
    if len(source) >= 2 and source[0] == source[-1] and source[0] in '"\'':
        source = source[1:-1]
    tree = _Parser(source).parse()
    logging.debug('parsed %r as %s', source, tree)
    return tree


def evaluate(e, bindings=None):
    """
    Evaluate `e` with IEEE double precision; bindings may be scalars or arrays

    Returns a float for scalar bindings and an ndarray otherwise. Division by
    zero, logarithms of non-positive numbers, even roots of negatives and
    overflows raise ExprDomainError.
    """
    env = {}
    for name, value in (bindings or {}).items():
        env[name] = np.asarray(value, dtype=np.float64)
    try:
        with np.errstate(divide='raise', invalid='raise', over='raise', under='ignore'):
            value = e.evaluate(env)
    except (FloatingPointError, ZeroDivisionError) as err:
        raise ExprDomainError(f'{e} is undefined at {_describe(bindings)}: {err}') from err
    value = np.asarray(value, dtype=np.float64)
    if np.isnan(value).any():
        raise ExprDomainError(f'{e} evaluates to NaN at {_describe(bindings)}')
    if value.ndim == 0:
        return float(value)
    return value


def _describe(bindings):
    if not bindings:
        return '{}'
    parts = []
    for name, value in bindings.items():
        value = np.asarray(value)
        parts.append(f'{name}={value.item():.6g}' if value.ndim == 0 else
                     f'{name}=<array of {value.size}>')
    return '{' + ', '.join(parts) + '}'


def as_expr(value):
    """Accept an Expr, expression text or a number."""
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float, np.floating)):
        return Num(float(value))
    return parse(value)


def constant_value(source):
    """Evaluate an expression without free variables (e.g. ``2*pi``)."""
    tree = as_expr(source)
    free = tree.variables()
    if free:
        raise UnboundVariableError(
            f'"{source}" must be constant but uses {", ".join(sorted(free))}')
    return evaluate(tree)


def check_derivative(f, df, var, points, bindings=None, rel_step=1e-6):
    """
    Compare `df` against centred differences of `f` in `var`

    Returns the largest error over `points`, scaled by max(1, |f|, |df|).
    """
    bindings = dict(bindings or {})
    points = np.asarray(points, dtype=np.float64)
    h = rel_step * np.maximum(1.0, np.abs(points))
    args = {k: np.broadcast_to(np.asarray(v, dtype=np.float64), points.shape)
            for k, v in bindings.items()}
    f_plus = np.broadcast_to(evaluate(f, {**args, var: points + h}), points.shape)
    f_minus = np.broadcast_to(evaluate(f, {**args, var: points - h}), points.shape)
    f_mid = np.broadcast_to(evaluate(f, {**args, var: points}), points.shape)
    exact = np.broadcast_to(evaluate(df, {**args, var: points}), points.shape)
    approx = (f_plus - f_minus) / (2.0 * h)
    scale = np.maximum(1.0, np.maximum(np.abs(exact), np.abs(f_mid)))
    return float(np.max(np.abs(approx - exact) / scale))
