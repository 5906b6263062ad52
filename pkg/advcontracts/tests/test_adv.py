import numpy as np
import pandas as pd
import pytest

from advcontracts.adv import (
    UNBOUNDED,
    adversary_best_response,
    adversary_gains,
    evaluate_menu,
    fine_at_cap,
    honest_choices,
    price_of_adversary,
    realized_revenue,
    solve_adv_exact
)
from advcontracts.demos import make_low_cost
from advcontracts.menu import ContractMenu
from advcontracts.model import check_menu
from advcontracts.nonadv import effective_prices
from advcontracts.tests.utils import brute_force_adv, random_model


@pytest.fixture(scope='module')
def three_type(marketplace):
    return marketplace.restrict(3).replace(gamma=0.3, rho=0.2)


def assert_tight_menu(menu, m):
    eps = menu['eps'].to_numpy()
    p = menu['effective_price'].to_numpy()
    tol = m.tolerances.ir_ic
    assert np.all(np.diff(eps) >= 0)
    assert abs(m.benefit(1, eps[0]) - p[0]) < tol

    for i in range(1, m.n):
        own = m.benefit(i + 1, eps[i]) - p[i]
        other = m.benefit(i + 1, eps[i - 1]) - p[i - 1]
        assert abs(own - other) < tol

    assert check_menu(menu, m).is_valid


def test_adversary_on_nonadv_menu(two_type_solution, two_type):
    menu = two_type_solution.menu
    gains = adversary_gains(menu, two_type)
    assert gains.tolist() == pytest.approx([0.1422, 8.573], abs=5e-3)

    z, utility = adversary_best_response(menu, two_type)
    assert z == 2
    assert utility == gains[1]
    assert realized_revenue(menu, z, two_type) == pytest.approx(0.2616, abs=2e-3)


def test_adversary_opts_out():
    m = make_low_cost()
    menu = ContractMenu.from_arrays([0.2, 0.8], [0.5, 1.0], [0.0, 0.0], gamma=m.gamma)
    assert adversary_best_response(menu, m) == (0, 0.0)


def test_evaluate_menu(two_type_solution, two_type):
    evaluation = evaluate_menu(two_type_solution.menu, two_type)
    assert evaluation.choices.tolist() == [1, 2]
    assert evaluation.adversary_choice == 2
    revenue = realized_revenue(two_type_solution.menu, 2, two_type)
    assert evaluation.revenue == pytest.approx(revenue)


def test_honest_choices_opt_out(two_type_solution, two_type):
    menu = two_type_solution.menu.copy()
    menu.loc[1, 'price'] += 1.0
    assert honest_choices(menu, two_type).tolist() == [0, 2]


def test_fine_at_cap(two_type):
    fines = fine_at_cap([0.0, 1.0], two_type.replace(gamma=0.5, phi=0.5))
    assert fines.tolist() == [0.0, 1.0]

    fines = fine_at_cap([1.0], two_type.replace(gamma=0.0))
    assert fines.tolist() == [two_type.s_max]

    fines = fine_at_cap([1.0], two_type.replace(gamma=1e-9, s_max=10.0))
    assert fines.tolist() == [10.0]


def test_oracle():
    rng = np.random.default_rng(11)
    for _ in range(25):
        m = random_model(rng, n=2, grid_m=21)
        solution = solve_adv_exact(m)
        assert solution.revenue_adv == pytest.approx(brute_force_adv(m), abs=1e-9)
        assert not solution.budget_exceeded
        assert_tight_menu(solution.menu, m)


def test_fines_at_cap(three_type):
    solution = solve_adv_exact(three_type)
    menu = solution.menu
    expected = fine_at_cap(menu['effective_price'].to_numpy(), three_type)
    assert menu['fine'].to_numpy() == pytest.approx(expected)
    assert menu.solve_settings['solver'] == 'exact'
    assert_tight_menu(menu, three_type)


def test_prune_matches_enumeration(three_type):
    pruned = solve_adv_exact(three_type)
    full = solve_adv_exact(three_type, prune=False)
    assert pruned.index.tolist() == full.index.tolist()
    assert pruned.revenue_adv == full.revenue_adv
    assert pruned.nodes <= full.nodes


def test_workers_are_deterministic(three_type):
    single = solve_adv_exact(three_type, workers=1)
    double = solve_adv_exact(three_type, workers=2)
    assert single.index.tolist() == double.index.tolist()
    pd.testing.assert_frame_equal(single.menu, double.menu)


def test_workers_from_environment(monkeypatch, three_type):
    monkeypatch.setenv('ADVCONTRACTS_WORKERS', '2')
    solution = solve_adv_exact(three_type)
    assert solution.index.tolist() == solve_adv_exact(three_type, workers=1).index.tolist()


def test_node_cap(three_type):
    solution = solve_adv_exact(three_type, node_cap=50, prune=False)
    assert solution.budget_exceeded
    assert solution.menu.solve_settings['budget_exceeded']
    assert solution.menu.n == 3


def test_unbounded(unbounded):
    solution = solve_adv_exact(unbounded)
    assert solution.revenue_adv <= 1e-7
    assert solution.menu['eps'].tolist() == [0.0, 0.0]

    result = price_of_adversary(unbounded)
    assert result.is_unbounded
    assert result.value == UNBOUNDED
    assert str(result) == 'inf'
    assert result.r_star == pytest.approx(0.831777, abs=2e-3)


def test_poadv_low_cost():
    result = price_of_adversary(make_low_cost(), solver='approx')
    assert result.value == 1.0
    assert result.adversary_choice == 0


def test_exact_beats_nonadv_menu(three_type):
    exact = price_of_adversary(three_type, solver='exact')
    nonadv = price_of_adversary(three_type, solver='nonadv-menu')
    assert exact.r_adv_star >= nonadv.r_adv_star - 1e-12
    assert exact.value <= nonadv.value + 1e-12


def test_poadv_of_given_menu(two_type_solution, two_type):
    result = price_of_adversary(two_type, menu=two_type_solution.menu)
    expected = 0.9 * two_type_solution.revenue_star / realized_revenue(two_type_solution.menu, 2, two_type)
    assert result.value == pytest.approx(expected)
    assert result.to_dict()['poadv'] == result.value


def test_unknown_solver(two_type):
    with pytest.raises(AssertionError, match='solver must be one of'):
        price_of_adversary(two_type, solver='greedy')


def test_poadv_at_least_one():
    rng = np.random.default_rng(5)
    for _ in range(20):
        m = random_model(rng, n=3, grid_m=11)
        result = price_of_adversary(m)
        assert result.value >= 1 - 1e-9

        eps = solve_adv_exact(m).menu['eps'].to_numpy()
        assert np.all(np.diff(eps) >= 0)


def random_menu(rng, m):
    """IR and IC menu with tight effective prices and random fines under the cap."""
    eps = np.sort(rng.choice(m.grid, size=m.n))
    effective = effective_prices(eps, m)
    fine = rng.uniform(0, 1, size=m.n) * fine_at_cap(effective, m)
    return ContractMenu.from_arrays(eps, effective - m.gamma * fine, fine, m.gamma)


def test_realized_revenue_identity():
    rng = np.random.default_rng(9)
    for _ in range(50):
        m = random_model(rng, n=3, grid_m=21)
        menu = random_menu(rng, m)
        z, utility = adversary_best_response(menu, m)
        expected = (1 - m.rho) * float(m.shares @ menu['effective_price']) - m.rho * utility
        assert realized_revenue(menu, z, m) == pytest.approx(expected)
        assert evaluate_menu(menu, m).revenue == pytest.approx(expected)


def test_decoy_never_raises_revenue():
    rng = np.random.default_rng(13)
    for _ in range(50):
        m = random_model(rng, n=3, grid_m=21)
        menu = random_menu(rng, m)
        z, utility = adversary_best_response(menu, m)

        # Priced above every honest benefit, so only the adversary can want it.
        effective = m.benefit(m.n, 1.0) + 1
        fine = rng.uniform(0, effective / m.gamma)
        decoy = ContractMenu.from_arrays(
            np.r_[menu['eps'], 1.0],
            np.r_[menu['price'], effective - m.gamma * fine],
            np.r_[menu['fine'], fine],
            m.gamma,
        )

        assert honest_choices(decoy, m).tolist() == honest_choices(menu, m).tolist()
        decoy_utility = max(0.0, float(adversary_gains(decoy, m).max()))
        assert decoy_utility >= utility

        honest = (1 - m.rho) * float(m.shares @ menu['effective_price'])
        assert honest - m.rho * decoy_utility <= realized_revenue(menu, z, m) + 1e-12


def test_poadv_rises_in_rho(three_type):
    values = [price_of_adversary(three_type.replace(gamma=0.9, rho=rho)).value for rho in [0.1, 0.2, 0.3, 0.4]]
    assert np.all(np.diff(values) >= -1e-9)
    assert values[-1] > values[0]


def test_poadv_rises_in_gamma(three_type):
    values = [price_of_adversary(three_type.replace(gamma=gamma)).value for gamma in [0.1, 0.3, 0.6, 0.9]]
    assert np.all(np.diff(values) >= -1e-9)
