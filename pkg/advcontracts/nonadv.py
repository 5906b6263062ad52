import logging
from dataclasses import dataclass, field
from functools import partial

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar

from .menu import ContractMenu
from .model import check_model

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class CurveTable:
    """A function tabulated on a grid of privacy levels.

    Args:
        grid (array): Strictly increasing privacy levels.
        values (array): Function values on the grid.
        evaluate (callable): Exact evaluation off the grid. Defaults to linear interpolation.
    """
    grid: np.ndarray
    values: np.ndarray
    evaluate: callable = field(default=None, repr=False)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        assert self.grid.shape == self.values.shape, 'grid and values must have equal lengths'
        assert np.all(np.diff(self.grid) > 0), 'grid must be strictly increasing'

    def __call__(self, eps):
        if self.evaluate is not None: return self.evaluate(eps)
        values = np.interp(eps, self.grid, self.values)
        return float(values) if np.ndim(eps) == 0 else values

    def to_frame(self):
        """Returns the curve as a two-column table (eps, P)."""
        return pd.DataFrame({'eps': self.grid, 'P': self.values})


@dataclass(eq=False)
class NonAdvSolution:
    """The optimal menu without adversaries.

    Args:
        eps_star (array): Optimal privacy level of each type.
        menu (ContractMenu): Optimal contracts, all fines zero.
        revenue_star (float): Optimal revenue, sum of q_i p_i.
        curve (CurveTable): Price-contract curve on [0, 1].
        index (array): Grid index of each privacy level.
        pooled (list): Runs of adjacent types (1-based, inclusive) that share a privacy level after ironing.
        method (str): 'ironing', or 'dynamic_program' when the exact recursion found a better vector.
    """
    eps_star: np.ndarray
    menu: ContractMenu
    revenue_star: float
    curve: CurveTable
    index: np.ndarray
    pooled: list = field(default_factory=list)
    method: str = 'ironing'

    @property
    def prices(self):
        return self.menu['effective_price'].to_numpy()

    def to_frame(self):
        """Returns the contracts as rows (type_index, eps, price, fine, effective_price)."""
        return pd.DataFrame(self.menu).reset_index()


def _benefits_at(benefits, eps):
    """Returns b_i(eps_i) for each pair of benefit and privacy level."""
    return np.array([benefit(value) for benefit, value in zip(benefits, eps)])


def effective_prices(eps, m):
    """Computes the effective prices that make IR of type 1 and every downward IC tight.

    Args:
        eps (array): Non-decreasing privacy levels, one per type.
        m (MarketModel): The market model.

    Returns:
        prices (array): Effective prices p'_i = p_i + gamma s_i.

    Examples:
        >>> prices = effective_prices([0.2, 0.8], model)
        >>> [round(p, 6) for p in prices]
        [0.864665, 1.563793]
    """
    eps = np.asarray(eps, dtype=float)
    assert eps.shape == (m.n,), 'need one privacy level per type'
    assert np.all(np.diff(eps) >= 0), 'privacy levels must be non-decreasing'

    own = _benefits_at(m.benefits, eps)
    previous = np.zeros(m.n)
    previous[1:] = _benefits_at(m.benefits[1:], eps[:-1])
    prices = np.cumsum(own - previous)
    assert np.all(prices >= -m.tolerances.shape), 'effective prices must be non-negative'
    return prices


def grid_prices(index, m):
    """Effective prices of monotone grid vectors, computed from the benefit table.

    Args:
        index (array): Grid indices of shape (n,) or (count, n).
        m (MarketModel): The market model.

    Returns:
        prices (array): Effective prices with the shape of index.
    """
    index = np.asarray(index)
    table = m.benefit_table
    types = np.arange(m.n)
    own = table[types, index]
    previous = np.zeros_like(own)
    previous[..., 1:] = table[types[1:], index[..., :-1]]
    return np.cumsum(own - previous, axis=-1)


def virtual_value(i, eps, m):
    """Computes the virtual value of type i, g_i(eps) = Q_i b_i(eps) - Q_{i+1} b_{i+1}(eps).

    Q_i is the share of types i and above. The sum of g_i(eps_i) over the types equals
    the revenue of the menu priced by ``effective_prices``.

    Args:
        i (int): Type index (1-based).
        eps (float or array): Privacy levels.
        m (MarketModel): The market model.

    Returns:
        value (float or array): Virtual value at eps.
    """
    if not 1 <= i <= m.n: raise IndexError('type index %d out of range' % i)
    tail = m.tail_shares
    value = tail[i - 1] * m.benefit(i, eps)
    if i < m.n: value = value - tail[i] * m.benefit(i + 1, eps)
    return value


def _iron(table):
    """Pools adjacent violators of the per-type argmaxes.

    Args:
        table (array): Virtual values on the grid, shape (n, grid_m).

    Returns:
        index (array): Monotone grid indices.
        pooled (list): Pooled runs as (first, last) 1-based pairs.
    """
    blocks = []
    for i, row in enumerate(table):
        blocks.append([i, i, int(np.argmax(row))])

        while len(blocks) > 1 and blocks[-2][2] > blocks[-1][2]:
            last = blocks.pop()
            blocks[-1][1] = last[1]
            start, end = blocks[-1][:2]
            blocks[-1][2] = int(np.argmax(table[start:end + 1].sum(axis=0)))
            logger.debug('pooled types %d..%d at grid index %d', start + 1, end + 1, blocks[-1][2])

    index = np.empty(len(table), dtype=int)
    for start, end, k in blocks: index[start:end + 1] = k
    pooled = [(start + 1, end + 1) for start, end, _ in blocks if end > start]
    return index, pooled


def best_monotone(table):
    """Maximizes a separable objective over non-decreasing grid vectors.

    Uses the recursion V_i(k) = table[i, k] + max_{j <= k} V_{i-1}(j). Ties resolve to
    the smallest grid index, coordinate by coordinate from the last type down.

    Args:
        table (array): Objective terms, shape (n, grid_m).

    Returns:
        index (array): Optimal grid indices.
        value (float): Optimal objective.
    """
    values = [table[0]]
    for row in table[1:]:
        values.append(row + np.maximum.accumulate(values[-1]))

    index = np.empty(len(table), dtype=int)
    index[-1] = int(np.argmax(values[-1]))
    for i in range(len(table) - 2, -1, -1):
        index[i] = int(np.argmax(values[i][:index[i + 1] + 1]))

    return index, float(values[-1][index[-1]])


def _objective(table, index):
    return float(table[np.arange(len(index)), index].sum())


def _refine(index, m):
    """Golden-section refinement of each pooled block inside its winning grid cell."""
    grid = m.grid
    eps = grid[index].copy()
    starts = np.flatnonzero(np.r_[True, np.diff(index) > 0])
    ends = np.r_[starts[1:], m.n]

    for start, end in zip(starts, ends):
        k = index[start]
        lower = max(grid[max(k - 1, 0)], eps[start - 1] if start else 0.0)
        upper = min(grid[min(k + 1, m.grid_m - 1)], eps[end] if end < m.n else 1.0)
        if upper <= lower: continue

        def negative(value, start=start, end=end):
            return -sum(virtual_value(i + 1, value, m) for i in range(start, end))

        result = minimize_scalar(negative, bounds=(lower, upper), method='bounded', options={'xatol': m.tolerances.bisection})
        if result.success and result.fun < negative(eps[start]):
            eps[start:end] = result.x

    return eps


def solve_nonadv(m, refine=False):
    """Solves the contract design problem without adversaries.

    Each type's privacy level maximizes its virtual value on the grid. Adjacent types whose
    maximizers decrease are pooled and re-maximized jointly. The ironed vector is certified
    against the exact monotone recursion on the same grid.

    Args:
        m (MarketModel): A valid market model.
        refine (bool): Whether to refine privacy levels between grid points. Only used when every benefit is parametric.

    Returns:
        solution (NonAdvSolution): The optimal contracts and the price-contract curve.

    Examples:
        >>> solution = solve_nonadv(model)
        >>> round(solution.revenue_star, 4)
        1.2433
    """
    check_model(m)
    table = m.virtual_value_table
    index, pooled = _iron(table)
    value = _objective(table, index)
    method = 'ironing'

    exact_index, exact_value = best_monotone(table)
    if exact_value > value + 1e-12 * max(1.0, abs(value)):
        logger.info('ironing reached %.12g, exact recursion %.12g; using the recursion', value, exact_value)
        index, value, method = exact_index, exact_value, 'dynamic_program'

    refined = refine and m.is_parametric
    if refined:
        eps = _refine(index, m)
        prices = effective_prices(eps, m)
    else:
        eps = m.grid[index]
        prices = grid_prices(index, m)

    revenue = float(m.shares @ prices)
    logger.info('non-adversarial revenue %.9g with %d pooled runs', revenue, len(pooled))

    settings = {
        'solver': 'nonadv',
        'grid_m': m.grid_m,
        'refine': bool(refined),
        'method': method,
        'honest_revenue': revenue,
    }

    menu = ContractMenu.from_arrays(eps, prices, np.zeros(m.n), m.gamma, settings)
    curve = _price_contract_curve(eps, prices, m)
    return NonAdvSolution(eps, menu, revenue, curve, index, pooled, method)


def _curve_values(eps, eps_star, prices, m):
    """Evaluates the price-contract curve at privacy levels eps."""
    if np.ndim(eps) == 0:
        j = int(np.searchsorted(eps_star, eps, side='left'))
        if j == 0: return float(m.benefit(1, eps))
        benefit = m.benefits[min(j, m.n - 1)]
        return float(prices[j - 1] + benefit(eps) - benefit(eps_star[j - 1]))

    values = np.atleast_1d(np.asarray(eps, dtype=float))
    segment = np.searchsorted(eps_star, values, side='left')
    out = np.empty(values.shape)

    for j in np.unique(segment):
        at = segment == j
        if j == 0:
            out[at] = m.benefit(1, values[at])
        else:
            i = min(j, m.n - 1)
            out[at] = prices[j - 1] + m.benefits[i](values[at]) - m.benefits[i](eps_star[j - 1])

    return float(out[0]) if np.ndim(eps) == 0 else out


def _price_contract_curve(eps_star, prices, m):
    evaluate = partial(_curve_values, eps_star=np.asarray(eps_star), prices=np.asarray(prices), m=m)
    return CurveTable(m.grid, evaluate(m.grid), evaluate)


def price_contract_curve(sol, m):
    """Builds the price-contract curve through the optimal contracts.

    The curve equals b_1 up to the first contract, is parallel to b_i between the
    contracts of types i - 1 and i, and is parallel to b_n beyond the last contract.

    Args:
        sol (NonAdvSolution): The non-adversarial solution.
        m (MarketModel): The market model.

    Returns:
        curve (CurveTable): The curve on the model grid, exact off the grid.
    """
    return _price_contract_curve(sol.eps_star, sol.prices, m)
