"""
Tests for the expression language
"""

import operator
import re

import numpy as np
import pytest

from charflow.lib._errors import (
    ExprDomainError,
    ExprSyntaxError,
    UnboundVariableError,
    UnknownIdentifierError,
)
from charflow.lib._expr import check_derivative, constant_value, evaluate, parse


def test_precedence_and_associativity():
    """Power binds tighter than unary minus and is right associative."""
    assert evaluate(parse('2^3^2')) == 512.0
    assert evaluate(parse('-2^2')) == -4.0
    assert evaluate(parse('1 + 2*3 - 4/2')) == 5.0
    assert evaluate(parse('(1 + 2)*3')) == 9.0


def test_functions_and_bindings():
    value = evaluate(parse('sin(x)*u + exp(0)'), {'x': np.pi / 2, 'u': 3.0})
    assert value == pytest.approx(4.0, abs=1e-15)
    xs = np.linspace(0.0, 1.0, 5)
    values = evaluate(parse('u^2/2'), {'u': xs})
    assert isinstance(values, np.ndarray)
    np.testing.assert_allclose(values, xs**2 / 2, rtol=0, atol=1e-15)


def test_quoted_source_is_accepted():
    assert evaluate(parse('"3/2 - cos(x)"'), {'x': 0.0}) == 0.5


def test_syntax_error_carries_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse('1 +')
    assert info.value.offset == 3
    with pytest.raises(ExprSyntaxError) as info:
        parse('1 + 2 @')
    assert info.value.offset == 6


def test_unknown_identifiers():
    with pytest.raises(UnknownIdentifierError):
        parse('foo(x)')
    with pytest.raises(UnknownIdentifierError):
        parse('y + 1')


def test_domain_errors_are_raised_not_returned():
    """Division by zero and invalid logs or roots never come back as inf or NaN."""
    with pytest.raises(ExprDomainError):
        evaluate(parse('1/x'), {'x': 0.0})
    with pytest.raises(ExprDomainError):
        evaluate(parse('ln(x)'), {'x': -1.0})
    with pytest.raises(ExprDomainError):
        evaluate(parse('sqrt(x)'), {'x': np.array([1.0, -1.0])})


def test_unbound_variable():
    with pytest.raises(UnboundVariableError):
        evaluate(parse('u + 1'))


def test_constant_value():
    assert constant_value('2*pi') == pytest.approx(2.0 * np.pi, rel=1e-15)
    assert constant_value(1.5) == 1.5
    with pytest.raises(UnboundVariableError):
        constant_value('x + 1')


def test_check_derivative():
    points = np.linspace(-2.0, 2.0, 11)
    assert check_derivative(parse('u^2/2'), parse('u'), 'u', points) < 1e-6
    assert check_derivative(parse('u^2/2'), parse('2*u'), 'u', points) > 0.1
    err = check_derivative(parse('sin(x)*u'), parse('cos(x)*u'), 'x', points,
                           bindings={'u': 2.0})
    assert err < 1e-6


@pytest.mark.parametrize('source', [
    '2^3^2', '-2^2', '2^-1', '1 - 2 - 3', 'u^2/2', 'sin(x)*u + exp(0)',
    '-(u*(1-u))^1.5', '3/2-cos(x)', '2.5e-3*x0 - t', 'pi*x - e',
])
def test_printed_form_parses_back(source):
    tree = parse(source)
    again = parse(str(tree))
    assert again == tree
    bindings = {'u': 0.3, 'x': 0.7, 't': 0.2, 'x0': 1.1}
    assert evaluate(again, bindings) == evaluate(tree, bindings)


_PRECEDENCE = {'+': 1, '-': 1, '*': 2, '/': 2, '^': 3}
_APPLY = {'+': operator.add, '-': operator.sub, '*': operator.mul,
          '/': operator.truediv, '^': operator.pow}


def _shunting_yard(source):
    """Reference evaluator for digits, + - * / ^ and parentheses."""
    values, ops = [], []

    def reduce():
        op = ops.pop()
        right, left = values.pop(), values.pop()
        values.append(_APPLY[op](left, right))

    for token in re.findall(r'\d+|[-+*/^()]', source):
        if token.isdigit():
            values.append(float(token))
        elif token == '(':
            ops.append(token)
        elif token == ')':
            while ops[-1] != '(':
                reduce()
            ops.pop()
        else:
            while ops and ops[-1] != '(' and (
                    _PRECEDENCE[ops[-1]] > _PRECEDENCE[token]
                    or (_PRECEDENCE[ops[-1]] == _PRECEDENCE[token] and token != '^')):
                reduce()
            ops.append(token)
    while ops:
        reduce()
    return values[0]


def _random_source(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.3:
            return '^'.join(str(d) for d in rng.integers(1, 3, size=rng.integers(2, 4)))
        return str(rng.integers(1, 10))
    text = (_random_source(rng, depth - 1) + ' ' + str(rng.choice(list('+-*/'))) + ' '
            + _random_source(rng, depth - 1))
    return f'({text})' if rng.random() < 0.3 else text


def test_precedence_matches_shunting_yard():
    rng = np.random.default_rng(7)
    for _ in range(200):
        source = _random_source(rng, 4)
        try:
            expected = _shunting_yard(source)
        except ZeroDivisionError:
            with pytest.raises(ExprDomainError):
                evaluate(parse(source))
            continue
        assert evaluate(parse(source)) == pytest.approx(expected, rel=1e-12, abs=1e-300), source
