"""
Tests for order fitting and refinement ladders
"""

import numpy as np
import pytest

from charflow.lib._converge import fit_order, local_orders, run_ladder
from charflow.lib._errors import ConfigError
from charflow.lib._problems import get_problem
from charflow.lib._solver import SolverConfig


def test_fit_order_recovers_power_law():
    h = 0.1 * 0.5 ** np.arange(5)
    assert fit_order(h, 3.0 * h ** 4) == pytest.approx(4.0)
    assert fit_order(h, 0.2 * h ** 1.5) == pytest.approx(1.5)


def test_fit_order_skips_zero_errors():
    h = 0.1 * 0.5 ** np.arange(4)
    err = h ** 2
    err[-1] = 0.0
    assert fit_order(h, err) == pytest.approx(2.0)
    assert np.isnan(fit_order(h, [1e-3, 0.0, 0.0, 0.0]))


def test_local_orders():
    h = [0.4, 0.2, 0.1]
    orders = local_orders(h, [1.6e-3, 1e-4, 6.25e-6])
    assert np.isnan(orders[0])
    np.testing.assert_allclose(orders[1:], [4.0, 4.0])
    assert np.isnan(local_orders(h, [1e-3, 0.0, 0.0])[2])


def test_ladder_settings_are_checked():
    prob = get_problem('sine-burgers')
    with pytest.raises(ConfigError):
        run_ladder(prob, SolverConfig(n_nodes=10), 1.5, mode='diagonal')
    with pytest.raises(ConfigError):
        run_ladder(prob, SolverConfig(n_nodes=10), 1.5, levels=1)


def test_spatial_ladder_on_sine_burgers():
    """Equal-area shock positions converge at high order in the node count."""
    prob = get_problem('sine-burgers')
    config = SolverConfig(n_nodes=20, dt=0.25, interp='area_preserving')
    table, order = run_ladder(prob, config, 2.0, mode='spatial', levels=4)
    assert list(table.columns) == ['level', 'h', 'error', 'order', 'reference']
    assert list(table['reference'].unique()) == ['shocks']
    assert len(table) == 4
    np.testing.assert_allclose(table['h'], np.pi / (20.0 * 2.0 ** np.arange(4) - 1.0))
    assert np.all(np.diff(table['error']) < 0.0)
    assert order > 3.5, f'fitted order {order}'


def test_temporal_ladder_against_smooth_oracle():
    prob = get_problem('particle-path')
    config = SolverConfig(n_nodes=20, dt=0.2, interp='hermite')
    table, _ = run_ladder(prob, config, 0.4, mode='temporal', levels=2, sample_count=11)
    assert list(table['reference'].unique()) == ['solution']
    np.testing.assert_allclose(table['h'], [0.2, 0.1])
    assert np.all(table['error'] < 1e-2)


def test_sine_burgers_shock_is_sixth_order_in_space():
    """Area-preserving ladder n=20..320 through the breaking time to t=2."""
    prob = get_problem('sine-burgers')
    config = SolverConfig(n_nodes=20, dt=0.05, interp='area_preserving')
    table, _ = run_ladder(prob, config, 2.0, mode='spatial', levels=5)
    assert len(table) == 5
    assert table['error'].iloc[-1] <= 1e-8
    # the finest level sits at round-off, so the order comes from the first four
    order = fit_order(table['h'][:4], table['error'][:4])
    assert 5.5 <= order <= 6.5, f'fitted order {order}'


@pytest.mark.parametrize('name,config,t_end', [
    ('three-state-collision', SolverConfig(n_nodes=8, dt=0.1, interp='hermite', guard=4), 2.0),
    ('sine-source-shock', SolverConfig(n_nodes=40, dt=0.1, interp='hermite', boundary_stride=1),
     1.0),
])
def test_rk4_shock_paths_are_fourth_order_in_time(name, config, t_end):
    table, order = run_ladder(get_problem(name), config, t_end, mode='temporal', levels=4)
    assert list(table['reference'].unique()) == ['shocks']
    assert np.all(np.diff(table['error']) < 0.0)
    assert 3.7 <= order <= 4.3, f'{name} temporal order {order}'


def test_ladder_threads_do_not_change_results():
    prob = get_problem('sine-burgers')
    config = SolverConfig(n_nodes=20, dt=0.25, interp='hermite')
    serial, _ = run_ladder(prob, config, 1.5, levels=3, n_jobs=1)
    pooled, _ = run_ladder(prob, config, 1.5, levels=3)
    np.testing.assert_array_equal(serial['error'], pooled['error'])
    with pytest.raises(ConfigError):
        run_ladder(prob, config, 1.5, levels=3, n_jobs=0)


def test_inflow_keeps_area_preserving_order():
    """Inflow nodes carry sub-Hermite areas, so the boundary shock beats fourth order."""
    prob = get_problem('sine-source-shock')
    config = SolverConfig(n_nodes=10, dt=0.005, interp='area_preserving')
    table, _ = run_ladder(prob, config, 1.0, mode='spatial', levels=3)
    order = table['order'].iloc[-1]
    assert 4.5 <= order <= 5.5, f'local order {order} between n=20 and n=40'
