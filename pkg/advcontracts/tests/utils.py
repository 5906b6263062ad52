from io import StringIO
from itertools import combinations_with_replacement, product

import numpy as np
import pandas as pd

from advcontracts.model import AdversaryCost, BenefitFunction, MarketModel


def read_csv(data, **kwargs):
    """Helper function for creating a dataframe from in-memory CSV string (or list of strings).

    Args:
        data (str or list) : CSV string(s)

    Returns:
        DataFrame : Instance of a dataframe.
    """
    if isinstance(data, list):
        data = '\n'.join(data)

    with StringIO(data) as data:
        df = pd.read_csv(data, **kwargs)

    return df


def to_csv(df, **kwargs):
    csv = pd.DataFrame(df).to_csv(**kwargs)
    return csv.splitlines()


def random_model(rng, n, grid_m=21, cost_scale=None, **kwargs):
    """Random valid market with benefits a_i (1 - exp(-k_i eps)), a_i increasing and k_i = c / a_i."""
    scales = np.cumsum(rng.uniform(0.5, 1.5, size=n))
    c = rng.uniform(2, 10)
    benefits = [BenefitFunction('scaled_saturating_exp', scale=a, rate=c / a, type_index=i) for i, a in enumerate(scales, start=1)]
    q = rng.dirichlet(np.ones(n) * 2)
    cost = AdversaryCost('exp_scaled', scale=rng.uniform(0.5, 10) if cost_scale is None else cost_scale)

    values = {
        'q': q,
        'rho': rng.uniform(0.05, 0.5),
        'gamma': rng.uniform(0.05, 0.9),
        'phi': rng.uniform(0.5, 1.0),
        'benefits': benefits,
        'cost': cost,
        'grid_m': grid_m,
    }

    values.update(kwargs)
    return MarketModel(**values)


def monotone_vectors(n, grid_m):
    """Every non-decreasing vector of n grid indices."""
    return [np.array(index) for index in combinations_with_replacement(range(grid_m), n)]


def brute_force_nonadv(m):
    """Largest sum of virtual values over every monotone grid vector."""
    table = m.virtual_value_table
    types = np.arange(m.n)
    return max(float(table[types, index].sum()) for index in monotone_vectors(m.n, m.grid_m))


def brute_force_adv(m, levels=11):
    """Largest adversarial revenue over monotone pairs with tight prices and a sweep of fines per type.

    Fines run over a uniform grid up to the cap min(s_max, phi p' / gamma) of each type.
    """
    best = -np.inf
    grid = m.grid

    for index in monotone_vectors(m.n, m.grid_m):
        eps = grid[index]
        own = m.benefit_table[np.arange(m.n), index]
        previous = np.r_[0.0, m.benefit_table[np.arange(1, m.n), index[:-1]]]
        p_prime = np.cumsum(own - previous)
        caps = np.minimum(m.s_max, m.phi * p_prime / m.gamma)
        honest = (1 - m.rho) * float(m.shares @ p_prime)
        cost = m.cost(eps)

        for fines in product(*[np.linspace(0, cap, levels) for cap in caps]):
            gains = cost - p_prime - (1 - m.gamma) * np.array(fines)
            value = honest - m.rho * max(0.0, float(gains.max()))
            best = max(best, value)

    return best
