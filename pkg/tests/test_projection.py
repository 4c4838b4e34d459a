"""
Tests for equal-area cuts and the modified equal-area principle
"""

import itertools

import numpy as np
import pytest

from charflow.lib._characteristics import advance_homogeneous, build_chain, seed_nodes, step_rk4
from charflow.lib._converge import fit_order
from charflow.lib._curve import CurveChain
from charflow.lib._errors import ChainMismatchError, NoOverturnError
from charflow.lib._problems import Piece, Problem, get_problem
from charflow.lib._projection import (
    equal_area_cuts,
    equal_area_residual_with_source,
    find_equal_area,
    find_modified_equal_area,
    measure_shock_speed,
    mixed_chain,
    naive_equal_area,
)
from charflow.lib._shock import rh_speed

# point symmetric about (0.5, 0.5), u falling from 1 to 0 through a fold
Z_CURVE = [(0.0, 1.0), (2.0, 0.7), (-1.0, 0.3), (1.0, 0.0)]
RISE = [(1.0, 0.0), (4.0 / 3.0, 1.0 / 3.0), (5.0 / 3.0, 2.0 / 3.0), (2.0, 1.0)]


def _labels(n):
    return np.column_stack([np.arange(n + 1, dtype=float), np.zeros(n + 1)])


def _shifted(control, dx):
    return [(x + dx, u) for x, u in control]


def test_symmetric_fold_is_cut_at_its_centre():
    chain = CurveChain.from_control([Z_CURVE], _labels(1))
    result = find_equal_area(chain)
    assert result.x_star == pytest.approx(0.5, abs=1e-12)
    assert result.u_left + result.u_right == pytest.approx(1.0, abs=1e-12)
    assert result.u_left > result.u_right
    assert result.S1 < result.S2
    assert abs(result.lobe_residual) < 1e-12


def test_monotone_chain_has_no_cut():
    chain = CurveChain.from_control([RISE], _labels(1))
    with pytest.raises(NoOverturnError):
        find_equal_area(chain)


def test_all_cuts_of_a_chain():
    control = [Z_CURVE, RISE, _shifted(Z_CURVE, 2.0)]
    chain = CurveChain.from_control(control, _labels(3))
    cuts = equal_area_cuts(chain)
    assert [c.x_star for c in cuts] == pytest.approx([0.5, 2.5], abs=1e-12)
    warm = equal_area_cuts(chain, previous=cuts)
    assert [c.x_star for c in warm] == pytest.approx([0.5, 2.5], abs=1e-12)


def test_sine_burgers_shock_at_t2():
    """Equal-area cut of the evolved sine bump at t=2 sits at pi/2 + 2 with height 1."""
    prob = get_problem('sine-burgers')
    (nodes,), _ = seed_nodes(prob, 161, ledger=True)
    chain = build_chain(advance_homogeneous(nodes, prob, 2.0), 'area_preserving', prob)
    result = find_equal_area(chain)
    assert result.x_star == pytest.approx(np.pi / 2.0 + 2.0, abs=1e-5)
    assert result.u_left == pytest.approx(1.0, abs=1e-4)
    assert result.u_right == pytest.approx(0.0, abs=1e-6)


def test_equal_area_speed_matches_rankine_hugoniot():
    """Cuts dt apart move at the mean Rankine-Hugoniot speed of their states."""
    prob = get_problem('sine-burgers')
    (nodes,), _ = seed_nodes(prob, 161, ledger=True)
    dt = 1e-3
    results = [find_equal_area(build_chain(advance_homogeneous(nodes, prob, t),
                                           'area_preserving', prob))
               for t in (2.0, 2.0 + dt)]
    measured = measure_shock_speed(results[0], results[1], dt)
    expected = 0.5 * sum(rh_speed(prob, r.u_left, r.u_right) for r in results)
    assert abs(measured - expected) < 1e-4, f'{measured} vs {expected}'


def test_mixed_chain_checks_its_inputs():
    one = CurveChain.from_control([Z_CURVE], _labels(1))
    two = CurveChain.from_control([Z_CURVE, RISE], _labels(2))
    with pytest.raises(ChainMismatchError):
        mixed_chain(one, two)
    other = CurveChain.from_control([Z_CURVE], _labels(1) + [[0.5, 0.0], [0.5, 0.0]])
    with pytest.raises(ChainMismatchError):
        mixed_chain(one, other)


def test_modified_equal_area_without_motion():
    """With identical old and new chains the modified cut is the plain cut."""
    chain = CurveChain.from_control([Z_CURVE], _labels(1))
    mixed = mixed_chain(chain, chain)
    np.testing.assert_allclose(mixed.control, chain.control, rtol=0, atol=1e-14)
    plain = find_equal_area(chain)
    modified = find_modified_equal_area(chain, chain, 0.5)
    assert modified.x_star == pytest.approx(plain.x_star, abs=1e-12)
    assert modified.u_left == pytest.approx(plain.u_left, abs=1e-12)


def test_no_source_bias_without_source():
    prob = get_problem('sine-burgers')
    chain = CurveChain.from_control([Z_CURVE], _labels(1))
    assert equal_area_residual_with_source(chain, prob, 0.2, 0.8) == 0.0


def test_naive_projection_depends_on_the_source_exponent():
    """The plain projection moves with k although the true shock speed is 1/2 for every k."""
    positions = {}
    for k in (1.0, 1.5, 6.0):
        prob = get_problem('box-logistic-k', k=k)
        result, _ = naive_equal_area(prob, 41, 1.0, dt=1e-2)
        positions[k] = result.x_star
    for a, b in itertools.combinations(positions, 2):
        assert abs(positions[a] - positions[b]) > 1e-3, positions


@pytest.mark.parametrize('mode', ['hermite', 'area_preserving'])
def test_breaking_time_has_no_round_off_fold(mode):
    """At t=1 the sine bump is vertical at pi; a fold of round-off width is not cut."""
    prob = get_problem('sine-burgers')
    (nodes,), _ = seed_nodes(prob, 320, ledger=True)
    chain = build_chain(advance_homogeneous(nodes, prob, 1.0), mode, prob)
    for Sa, Sb in chain.fold_intervals():
        assert chain.point_at(Sa)[0] - chain.point_at(Sb)[0] > 1e-13
    for cut in equal_area_cuts(chain):
        assert cut.u_left >= cut.u_right


def test_round_off_fold_is_ignored():
    width = 4e-16
    control = [(3.0, 1.0), (3.0 + width, 0.7), (3.0 - width, 0.3), (3.0, 0.0)]
    chain = CurveChain.from_control([control], _labels(1))
    assert chain.fold_intervals() == []
    assert equal_area_cuts(chain) == []
    with pytest.raises(NoOverturnError):
        find_equal_area(chain)


def test_source_bias_of_a_linear_source():
    """With Q = -u the bias is minus the lobe area over the height drop."""
    prob = Problem(name='decay', F='u^2/2', dF='u', d2F='1', Q='-u', dQ_du='-1', dQ_dx='0',
                   pieces=(Piece(0.0, 1.0, '1-x', '-1'),), domain=(0.0, 1.0))
    chain = CurveChain.from_control([Z_CURVE], _labels(1))
    u1, u2 = chain.point_at(0.2)[1], chain.point_at(0.8)[1]
    expected = -chain.area_between(0.2, 0.8) / (u1 - u2)
    bias = equal_area_residual_with_source(chain, prob, 0.2, 0.8)
    assert bias == pytest.approx(expected, rel=1e-12, abs=1e-15)
    assert equal_area_residual_with_source(chain, prob, (0, 0.2), (0, 0.8)) == bias


def test_source_bias_grows_with_the_source():
    """The weak k=6 source biases the plain projection far less than k=1."""
    bias = {}
    for k in (1.0, 6.0):
        prob = get_problem('box-logistic-k', k=k)
        result, chain = naive_equal_area(prob, 41, 1.0, dt=1e-2)
        bias[k] = equal_area_residual_with_source(chain, prob, result.S1, result.S2)
    assert bias[1.0] > 0.0
    assert bias[6.0] > 0.0
    assert bias[1.0] > 100.0 * bias[6.0], bias


def _modified_cut(prob, dt):
    (nodes,), _ = seed_nodes(prob, 41, connect_compressive=True)
    old = build_chain(nodes, 'hermite', prob)
    new = build_chain(step_rk4(nodes, prob, dt), 'hermite', prob)
    return find_modified_equal_area(old, new)


def test_modified_equal_area_is_second_order_in_one_step():
    """The born shock of the unit box sits at 1 + dt/2 up to O(dt^2)."""
    prob = get_problem('box-logistic-k', k=1.0)
    dts = np.array([0.2, 0.1, 0.05, 0.025])
    cuts = [_modified_cut(prob, dt) for dt in dts]
    errors = [abs(cut.x_star - (1.0 + 0.5 * dt)) for cut, dt in zip(cuts, dts)]
    order = fit_order(dts, errors)
    assert 1.6 <= order <= 2.4, f'one-step order {order}'
    speeds = [(cut.x_star - 1.0) / dt for cut, dt in zip(cuts, dts)]
    assert np.all(np.diff(np.abs(np.array(speeds) - 0.5)) < 0.0)
    assert speeds[-1] == pytest.approx(0.5, abs=1e-2)
    assert cuts[-1].u_left == pytest.approx(1.0, abs=1e-9)
    assert cuts[-1].u_right == pytest.approx(0.0, abs=1e-9)
