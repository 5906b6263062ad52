import os

from ..dp import read_dataset
from ..model import AdversaryCost, BenefitFunction, MarketModel, read_scenario

DATA = os.path.join(os.path.dirname(__file__))


def make_marketplace(n=10, gamma=0.5, rho=0.3, phi=0.95, cost_scale=6.0, grid_m=101, s_max=1e6, name='marketplace'):
    """Builds the marketplace with benefits b_i(eps) = i (1 - exp(-10 eps / i)), uniform shares and C = K (exp(eps) - 1)."""
    benefits = [BenefitFunction('scaled_saturating_exp', scale=i, rate=10 / i, type_index=i) for i in range(1, n + 1)]

    return MarketModel(
        q=[1 / n] * n,
        rho=rho,
        gamma=gamma,
        phi=phi,
        benefits=benefits,
        cost=AdversaryCost('exp_scaled', scale=cost_scale),
        grid_m=grid_m,
        s_max=s_max,
        name=name,
    )


def make_two_type(gamma=0.1, rho=0.1, grid_m=1001, **kwargs):
    """The two lowest types of the marketplace with equal shares."""
    return make_marketplace(n=2, gamma=gamma, rho=rho, grid_m=grid_m, name='two_type', **kwargs)


def make_unbounded(rho=0.5, gamma=0.5, q=0.4, grid_m=101):
    """Two types with b_L = log(1 + eps) and b_H = 2 log(1 + eps).

    The adversary cost K (exp(eps) - 1) with K = 10 / rho + 2 (1 - gamma) / (rho gamma)
    leaves no menu with positive revenue, so the price of adversary is unbounded.
    """
    scale = 10 / rho + 2 * (1 - gamma) / (rho * gamma)
    benefits = [BenefitFunction('log1p', scale=1, type_index=1), BenefitFunction('log1p', scale=2, type_index=2)]

    return MarketModel(
        q=[q, 1 - q],
        rho=rho,
        gamma=gamma,
        phi=0.95,
        benefits=benefits,
        cost=AdversaryCost('exp_scaled', scale=scale),
        grid_m=grid_m,
        name='unbounded',
    )


def make_low_cost(gamma=0.5, rho=0.3, grid_m=101):
    """Two-type marketplace with a cost C = 0.01 eps that stays below every contract."""
    cost = AdversaryCost('tabulated', knots_eps=[0.0, 1.0], knots_values=[0.0, 0.01])
    return make_two_type(gamma=gamma, rho=rho, grid_m=grid_m).replace(cost=cost, name='low_cost')


def make_high_cost(gamma=0.5, rho=0.3, grid_m=101):
    """Two-type marketplace with a cost C = 100 (exp(eps) - 1) above every contract."""
    cost = AdversaryCost('exp_scaled', scale=100.0)
    return make_two_type(gamma=gamma, rho=rho, grid_m=grid_m).replace(cost=cost, name='high_cost')


def _scenario(name):
    return read_scenario(os.path.join(DATA, name + '.json'))


def load_marketplace():
    return _scenario('marketplace')


def load_two_type():
    return _scenario('two_type')


def load_unbounded():
    return _scenario('unbounded')


def load_low_cost():
    return _scenario('low_cost')


def load_high_cost():
    return _scenario('high_cost')


def load_patients():
    """A hundred bounded patient records for the query engine."""
    return read_dataset(os.path.join(DATA, 'patients.csv'))
