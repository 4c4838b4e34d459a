"""
Tests for Rankine-Hugoniot propagation, trimming, collisions and merging
"""

import numpy as np
import pytest

from charflow.lib._characteristics import build_chain, initial_nodes
from charflow.lib._converge import fit_order
from charflow.lib._errors import MergeError, OverlapError
from charflow.lib._problems import get_problem
from charflow.lib._shock import (
    SHOCK_METHODS,
    Branch,
    Shock,
    anchor_at,
    detect_collision,
    merge_shocks,
    overlap_region,
    refine_collision,
    resolve_anchor,
    rh_speed,
    shock_states,
    step_shock,
    trim_after_step,
    trim_head,
    trim_tail,
)


@pytest.fixture(scope='module')
def burgers():
    return get_problem('sine-burgers')


def _flat_branch(prob, lo, hi, u, n=7):
    nodes = initial_nodes(np.linspace(lo, hi, n), u, 0.0)
    return Branch(nodes, build_chain(nodes, 'hermite', prob))


def test_rh_speed(burgers):
    assert rh_speed(burgers, 0.9, 0.5) == pytest.approx(0.7)
    assert rh_speed(burgers, 0.3, -0.3) == pytest.approx(0.0)
    assert rh_speed(burgers, 0.4, 0.4) == pytest.approx(0.4)


@pytest.mark.parametrize('method', sorted(SHOCK_METHODS))
def test_butcher_tables_are_consistent(method):
    c, a, b = SHOCK_METHODS[method]
    assert sum(b) == pytest.approx(1.0)
    for ci, ai in zip(c, a):
        assert sum(ai) == pytest.approx(ci)


def test_overlap_region_and_states(burgers):
    left = _flat_branch(burgers, 0.0, 3.0, 0.9)
    right = _flat_branch(burgers, 1.0, 4.0, 0.5)
    region = overlap_region(left.chain, right.chain)
    assert (region.lo, region.hi) == pytest.approx((1.0, 3.0))
    assert shock_states(2.0, left.chain, right.chain, region) == pytest.approx((0.9, 0.5))
    with pytest.raises(OverlapError):
        shock_states(3.5, left.chain, right.chain, region)


@pytest.mark.parametrize('method', sorted(SHOCK_METHODS))
def test_step_between_constant_states(burgers, method):
    """Constant states give a straight shock path for every method."""
    left = _flat_branch(burgers, 0.0, 3.0, 0.9)
    right = _flat_branch(burgers, 1.0, 4.0, 0.5)

    def provider(c):
        return left.chain, right.chain, None

    assert step_shock(2.0, provider, 0.5, method, burgers) == pytest.approx(2.35)


def test_stage_outside_overlap(burgers):
    left = _flat_branch(burgers, 0.0, 3.0, 0.9)
    right = _flat_branch(burgers, 1.0, 4.0, 0.5)
    with pytest.raises(OverlapError):
        step_shock(2.9, lambda c: (left.chain, right.chain, None), 1.0, 'rk4', burgers)


def test_unknown_method(burgers):
    left = _flat_branch(burgers, 0.0, 3.0, 0.9)
    right = _flat_branch(burgers, 1.0, 4.0, 0.5)
    with pytest.raises(ValueError):
        step_shock(2.0, lambda c: (left.chain, right.chain, None), 0.1, 'rk45', burgers)


def test_trimming_keeps_guard_segments(burgers):
    branch = _flat_branch(burgers, 0.0, 3.0, 0.9)
    assert len(trim_tail(branch, 2.5, guard=1)) == 5
    assert len(trim_head(branch, 2.5, guard=1)) == 6
    assert len(trim_tail(branch, 0.2, guard=0)) == 2
    assert len(trim_head(branch, 5.9, guard=0)) == 2


def test_anchors_survive_trimming(burgers):
    branch = _flat_branch(burgers, 0.0, 3.0, 0.9)
    anchor = anchor_at(branch.chain, 2.5)
    assert anchor == pytest.approx((1.0, 0.0, 0.5))
    assert resolve_anchor(branch.chain, anchor) == pytest.approx(2.5)
    trimmed = branch.nodes.take(slice(1, None))
    chain = build_chain(trimmed, 'hermite', burgers)
    assert resolve_anchor(chain, anchor) == pytest.approx(1.5)
    gone = branch.nodes.take(slice(3, None))
    assert resolve_anchor(build_chain(gone, 'hermite', burgers), anchor) is None
    assert resolve_anchor(chain, None) is None


def test_detect_collision():
    event = detect_collision([1.0, 2.0, 5.0], [1.5, 1.4, 5.1], 3.0, 0.1)
    assert event.index == 0
    assert event.dt == pytest.approx(0.1 / 1.1)
    assert event.t == pytest.approx(3.0 + 0.1 / 1.1)
    assert detect_collision([1.0, 2.0], [1.5, 2.5], 0.0, 0.1) is None
    assert detect_collision([1.0], [1.5], 0.0, 0.1) is None


def test_refine_collision():
    assert refine_collision(lambda h: 1.0 - 2.0 * h, 1.0) == pytest.approx(0.5, abs=1e-14)
    assert refine_collision(lambda h: 1.0 - 0.5 * h, 1.0) == 1.0


def test_merge_shocks():
    a = Shock(3, 1.0, 0.9, 0.5)
    b = Shock(1, 1.0 + 1e-12, 0.5, 0.2)
    merged = merge_shocks(a, b)
    assert merged.id == 1
    assert merged.u_left == 0.9
    assert merged.u_right == 0.2
    assert merged.x_star == pytest.approx(1.0)


def test_merge_rejects_bad_pairs(burgers):
    with pytest.raises(MergeError):
        merge_shocks(Shock(0, 1.0, 0.9, 0.5), Shock(1, 1.5, 0.5, 0.2))
    with pytest.raises(MergeError):
        merge_shocks(Shock(0, 1.0, 0.1, 0.5), Shock(1, 1.0, 0.5, 0.3))
    one = _flat_branch(burgers, 0.0, 1.0, 0.5)
    two = _flat_branch(burgers, 0.0, 1.0, 0.5)
    with pytest.raises(MergeError):
        merge_shocks(Shock(0, 1.0, 0.9, 0.5, right_branch=one),
                     Shock(1, 1.0, 0.5, 0.2, left_branch=two))


def test_trim_after_step(burgers):
    """Both branches are cut at the new shock position."""
    left = _flat_branch(burgers, 0.0, 3.0, 0.9)
    right = _flat_branch(burgers, 1.0, 4.0, 0.5)
    kept_left, kept_right = trim_after_step(left, right, 2.2, guard=0)
    assert len(kept_left) == 6
    assert len(kept_right) == 5
    assert kept_left.x[-1] == pytest.approx(2.5)
    assert kept_right.x[0] == pytest.approx(2.0)


def _rising_provider(prob, dt):
    """Left state 0.9 + 0.2 t + 0.2 t^2 over a fixed right state 0.5."""
    right = _flat_branch(prob, 1.0, 4.0, 0.5)
    cache = {}

    def provide(c):
        if c not in cache:
            tau = c * dt
            cache[c] = _flat_branch(prob, 0.0, 3.0, 0.9 + 0.2 * tau + 0.2 * tau ** 2).chain
        return cache[c], right.chain, None
    return provide


@pytest.mark.parametrize('method,lo,hi', [
    ('euler', 1.8, 2.2),
    ('heun', 2.9, 3.1),
])
def test_one_step_error_order(burgers, method, lo, hi):
    """Speed 0.7 + 0.1 t + 0.1 t^2; Heun misses the exact path by dt^3 / 60."""
    dts = np.array([0.2, 0.1, 0.05, 0.025])
    exact = 2.0 + 0.7 * dts + 0.05 * dts ** 2 + dts ** 3 / 30.0
    found = np.array([step_shock(2.0, _rising_provider(burgers, dt), dt, method, burgers)
                      for dt in dts])
    errors = np.abs(found - exact)
    order = fit_order(dts, errors)
    assert lo <= order <= hi, f'{method} one-step order {order}'
    if method == 'heun':
        np.testing.assert_allclose(errors, dts ** 3 / 60.0, rtol=1e-6)


def test_rk4_step_is_exact_for_a_quadratic_speed(burgers):
    dt = 0.2
    x = step_shock(2.0, _rising_provider(burgers, dt), dt, 'rk4', burgers)
    assert x == pytest.approx(2.0 + 0.7 * dt + 0.05 * dt ** 2 + dt ** 3 / 30.0, abs=1e-14)
