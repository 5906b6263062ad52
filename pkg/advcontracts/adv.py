import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .menu import ContractMenu
from .model import check_model
from .nonadv import best_monotone, grid_prices, solve_nonadv

logger = logging.getLogger(__name__)

UNBOUNDED = float('inf')
NODE_CAP = 50_000_000
WORKERS_ENV = 'ADVCONTRACTS_WORKERS'
SOLVERS = ('exact', 'approx', 'nonadv-menu')

# Bounds within this distance of the incumbent are still explored.
PRUNE_SLACK = 1e-9


def _menu_arrays(menu):
    eps = menu['eps'].to_numpy(dtype=float)
    price = menu['price'].to_numpy(dtype=float)
    fine = menu['fine'].to_numpy(dtype=float)
    return eps, price, fine


def adversary_gains(menu, m):
    """Utility C(eps_i) - p_i - s_i of the adversary for each contract of the menu."""
    eps, price, fine = _menu_arrays(menu)
    return m.cost(eps) - price - fine


def adversary_best_response(menu, m):
    """Finds the contract the adversary buys.

    Opting out (index 0) has utility zero and wins exact ties, then smaller indices win.

    Args:
        menu (ContractMenu): The menu offered, one contract per honest type.
        m (MarketModel): The market model.

    Returns:
        choice (tuple(int, float)): Chosen index Z in 0..n and the utility it achieves.

    Examples:
        >>> from advcontracts.menu import ContractMenu
        >>> menu = ContractMenu.from_arrays([0.5, 1.0], [1.0, 2.0], [0.0, 0.0], gamma=0.0)
        >>> z, utility = adversary_best_response(menu, model)
        >>> z, round(utility, 4)
        (2, 8.3097)
    """
    assert len(menu) == m.n, 'menu must have one contract per type'
    values = np.r_[0.0, adversary_gains(menu, m)]
    z = int(np.argmax(values))
    return z, float(values[z])


def honest_utilities(menu, m):
    """Returns the expected utility of each type (rows) for each contract (columns)."""
    eps, price, fine = _menu_arrays(menu)
    effective = price + m.gamma * fine
    return np.vstack([benefit(eps) for benefit in m.benefits]) - effective[None, :]


def honest_choices(menu, m, tol=1e-9):
    """Finds the contract each honest type buys.

    A type keeps its own contract when no alternative, including opting out, is better by
    more than tol. Otherwise it takes its best option, opting out first and then the
    smallest index on ties.

    Args:
        menu (ContractMenu): The menu offered.
        m (MarketModel): The market model.
        tol (float): Utility difference treated as a tie with the own contract.

    Returns:
        choices (array): Chosen index per type, 0 for opting out.
    """
    utility = honest_utilities(menu, m)
    choices = np.empty(m.n, dtype=int)

    for i, row in enumerate(utility):
        options = np.r_[0.0, row]
        if row[i] >= options.max() - tol:
            choices[i] = i + 1
        else:
            choices[i] = int(np.argmax(options))

    return choices


def realized_revenue(menu, z, m):
    """Computes the revenue of a menu given the adversary's choice.

    Honest buyers pay the effective price of the contract they choose, which is their own
    contract whenever the menu satisfies IR and IC. The adversary pays p_Z + s_Z and costs
    C(eps_Z); it contributes nothing when Z = 0.

    Args:
        menu (ContractMenu): The menu offered.
        z (int): Adversary choice in 0..n.
        m (MarketModel): The market model.

    Returns:
        revenue (float): Expected revenue per buyer.
    """
    assert 0 <= z <= m.n, 'adversary choice %d out of range' % z
    eps, price, fine = _menu_arrays(menu)
    effective = np.r_[0.0, price + m.gamma * fine]
    choices = honest_choices(menu, m)
    honest = (1 - m.rho) * float(m.shares @ effective[choices])
    return honest + _adversary_term(menu, z, m)


@dataclass(eq=False)
class MenuEvaluation:
    """Outcome of offering a menu to the market.

    Args:
        adversary_choice (int): Adversary best response Z, 0 when it opts out.
        adversary_utility (float): Utility of the adversary at Z.
        honest_revenue (float): Revenue from honest buyers.
        adversary_term (float): Revenue from the adversary.
        choices (array): Contract chosen by each honest type, 0 for opting out.
    """
    adversary_choice: int
    adversary_utility: float
    honest_revenue: float
    adversary_term: float
    choices: np.ndarray

    @property
    def revenue(self):
        return self.honest_revenue + self.adversary_term


def evaluate_menu(menu, m):
    """Evaluates the best responses to a menu and the revenue they realize.

    Args:
        menu (ContractMenu): The menu offered.
        m (MarketModel): The market model.

    Returns:
        evaluation (MenuEvaluation): Choices and revenue split.
    """
    z, utility = adversary_best_response(menu, m)
    choices = honest_choices(menu, m)
    eps, price, fine = _menu_arrays(menu)
    effective = np.r_[0.0, price + m.gamma * fine]
    honest = (1 - m.rho) * float(m.shares @ effective[choices])
    return MenuEvaluation(z, utility, honest, _adversary_term(menu, z, m), choices)


def _adversary_term(menu, z, m):
    if z == 0: return 0.0
    eps, price, fine = _menu_arrays(menu)
    return m.rho * float(price[z - 1] + fine[z - 1] - m.cost(eps[z - 1]))


def fine_at_cap(p_prime, m):
    """Largest fines allowed by the steady-revenue constraint and the fine cap.

    Args:
        p_prime (array): Effective prices.
        m (MarketModel): The market model.

    Returns:
        fines (array): s_i = min(s_max, phi p'_i / gamma), or s_max when gamma = 0.

    Examples:
        >>> fines = fine_at_cap([0.75], model.replace(gamma=0.1, phi=0.95))
        >>> [round(s, 6) for s in fines]
        [7.125]
    """
    assert 0 <= m.gamma <= 1, 'attack probability must be in [0, 1]'
    p_prime = np.asarray(p_prime, dtype=float)
    assert np.all(p_prime >= -m.tolerances.shape), 'effective prices must be non-negative'

    if m.gamma > 0:
        return np.minimum(m.s_max, m.phi * np.maximum(p_prime, 0) / m.gamma)

    return np.full(p_prime.shape, m.s_max)


def menu_from_index(index, m, solve_settings=None):
    """Builds the menu with tight prices and capped fines for a monotone grid vector."""
    index = np.asarray(index)
    p_prime = grid_prices(index, m)
    fines = fine_at_cap(p_prime, m)
    prices = p_prime - m.gamma * fines
    return ContractMenu.from_arrays(m.grid[index], prices, fines, m.gamma, solve_settings)


@dataclass(eq=False)
class AdvSolution:
    """The optimal menu in the presence of adversaries.

    Args:
        menu (ContractMenu): Optimal contracts.
        adversary_choice (int): Adversary best response Z, 0 when it opts out.
        revenue_adv (float): Realized revenue R_A.
        honest_revenue (float): Revenue from honest buyers, (1 - rho) sum q_i p'_i.
        adversary_term (float): Revenue from the adversary, rho (p_Z + s_Z - C(eps_Z)).
        index (array): Grid index of each privacy level.
        nodes (int): Candidates evaluated by the search.
        budget_exceeded (bool): Whether the search stopped at the node cap.
    """
    menu: ContractMenu
    adversary_choice: int
    revenue_adv: float
    honest_revenue: float
    adversary_term: float
    index: np.ndarray
    nodes: int = 0
    budget_exceeded: bool = False

    def to_frame(self):
        """Returns the contracts as rows (type_index, eps, price, fine, effective_price)."""
        return pd.DataFrame(self.menu).reset_index()

    def summary(self):
        return {
            'adversary_choice': self.adversary_choice,
            'revenue_adv': self.revenue_adv,
            'honest_revenue': self.honest_revenue,
            'adversary_term': self.adversary_term,
            'nodes': self.nodes,
            'budget_exceeded': self.budget_exceeded,
        }


@dataclass(eq=False)
class _Tables:
    """Grid tables and completion bounds shared by every branch of the search."""
    virtual: np.ndarray
    benefit: np.ndarray
    cost: np.ndarray
    completion: np.ndarray
    min_gain: np.ndarray
    rho: float
    gamma: float
    phi: float
    s_max: float

    def fines(self, p_prime):
        if self.gamma > 0: return np.minimum(self.s_max, self.phi * np.maximum(p_prime, 0) / self.gamma)
        return np.full(np.shape(p_prime), self.s_max)

    def gains(self, cost, p_prime):
        return cost - p_prime - (1 - self.gamma) * self.fines(p_prime)


def _suffix(values, ufunc):
    return ufunc.accumulate(values[..., ::-1], axis=-1)[..., ::-1]


def _build_tables(m):
    """Precomputes the optimistic completion of the honest revenue and a floor on adversary gains.

    completion[i, k] is the best sum of virtual values of types i..n with indices >= k.
    min_gain[i, k] bounds from below the largest adversary gain among types i..n when their
    indices are >= k. Effective prices never exceed b_j(eps_j) and gains fall with the price.
    """
    n, grid_m = m.n, m.grid_m
    tables = _Tables(
        virtual=m.virtual_value_table,
        benefit=m.benefit_table,
        cost=m.cost_table,
        completion=np.zeros((n + 1, grid_m)),
        min_gain=np.full((n + 1, grid_m), -np.inf),
        rho=m.rho,
        gamma=m.gamma,
        phi=m.phi,
        s_max=m.s_max,
    )

    for i in range(n - 1, -1, -1):
        tables.completion[i] = _suffix(tables.virtual[i] + tables.completion[i + 1], np.maximum)
        floor = tables.gains(tables.cost, tables.benefit[i]) - PRUNE_SLACK
        tables.min_gain[i] = np.maximum(_suffix(floor, np.minimum), tables.min_gain[i + 1])

    return tables


def _evaluate_index(index, tables):
    """Exact objective of a monotone grid vector."""
    n = len(index)
    types = np.arange(n)
    honest = tables.virtual[types, index].sum()
    own = tables.benefit[types, index]
    previous = np.r_[0.0, tables.benefit[types[1:], index[:-1]]]
    p_prime = np.cumsum(own - previous)
    gain = max(0.0, tables.gains(tables.cost[index], p_prime).max())
    return (1 - tables.rho) * honest - tables.rho * gain


def _is_better(value, index, best_value, best_index):
    if value != best_value: return value > best_value
    return tuple(index) < tuple(best_index)


def _branch_and_bound(tables, incumbent, first, node_cap, prune=True):
    """Depth-first search over monotone grid vectors.

    Args:
        tables (_Tables): Search tables.
        incumbent (tuple): Best known (value, index).
        first (array): Grid indices allowed for the first type.
        node_cap (int): Maximum number of evaluated candidates.
        prune (bool): Whether to discard branches whose bound falls below the incumbent.

    Returns:
        result (tuple): (value, index, nodes, budget_exceeded)
    """
    n = tables.virtual.shape[0]
    rho = tables.rho
    best_value, best_index = incumbent
    nodes, exceeded = 0, False

    # A node holds the assigned indices, the honest revenue so far, the last
    # effective price and the largest adversary gain so far (opting out counts as 0).
    stack = [((), 0.0, 0.0, 0.0)]

    while stack:
        prefix, honest, p_last, gain = stack.pop()
        depth = len(prefix)

        if depth == 0:
            candidates = np.asarray(first)
            p_prime = tables.benefit[0, candidates]
        else:
            last = prefix[-1]
            candidates = np.arange(last, tables.virtual.shape[1])
            p_prime = p_last + tables.benefit[depth, candidates] - tables.benefit[depth, last]

        nodes += len(candidates)
        if nodes > node_cap:
            exceeded = True
            break

        honest_c = honest + tables.virtual[depth, candidates]
        gain_c = np.maximum(gain, tables.gains(tables.cost[candidates], p_prime))

        if depth == n - 1:
            values = (1 - rho) * honest_c - rho * gain_c
            k = int(np.argmax(values))
            index = prefix + (int(candidates[k]),)
            if _is_better(values[k], index, best_value, best_index):
                best_value, best_index = float(values[k]), index
            continue

        bound = (1 - rho) * (honest_c + tables.completion[depth + 1, candidates])
        bound -= rho * np.maximum(gain_c, tables.min_gain[depth + 1, candidates])

        order = np.argsort(bound, kind='stable')
        if prune: order = order[bound[order] >= best_value - PRUNE_SLACK]

        for k in order:
            child = prefix + (int(candidates[k]),)
            stack.append((child, honest_c[k], p_prime[k], gain_c[k]))

    return best_value, best_index, nodes, exceeded


def _search_partition(args):
    return _branch_and_bound(*args)


def _worker_count(workers):
    if workers is None: workers = int(os.environ.get(WORKERS_ENV, 1))
    assert workers >= 1, 'worker count must be positive'
    return workers


def _initial_incumbent(tables):
    """Best of the non-adversarial vector, the zero vector and truncations of the former."""
    index, _ = best_monotone(tables.virtual)
    candidates = [np.minimum(index, t) for t in np.unique(np.r_[0, index])]
    best_value, best_index = -np.inf, None

    for candidate in candidates:
        value = _evaluate_index(candidate, tables)
        candidate = tuple(int(k) for k in candidate)
        if best_index is None or _is_better(value, candidate, best_value, best_index):
            best_value, best_index = value, candidate

    return best_value, best_index


def solve_adv_exact(m, node_cap=NODE_CAP, workers=None, prune=True):
    """Solves the contract design problem with adversaries by branch and bound.

    The search runs over non-decreasing vectors of grid privacy levels. Each vector is priced
    with tight constraints and fines at the cap. Branches are discarded when
    (1 - rho) * (honest revenue so far + best completion) - rho * (floor on the adversary gain)
    falls below the best revenue found.

    Args:
        m (MarketModel): A valid market model.
        node_cap (int): Maximum number of evaluated candidates before returning the best found.
        workers (int): Processes splitting the first type's grid. Defaults to ADVCONTRACTS_WORKERS or 1.
        prune (bool): Whether to prune. Without pruning every monotone vector is evaluated.

    Returns:
        solution (AdvSolution): The best menu found.
    """
    check_model(m)
    workers = _worker_count(workers)
    tables = _build_tables(m)
    incumbent = _initial_incumbent(tables)

    parts = [np.arange(w, m.grid_m, workers) for w in range(workers)]
    parts = [(tables, incumbent, part, node_cap // workers, prune) for part in parts if len(part)]

    if workers == 1:
        results = [_search_partition(parts[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_search_partition, parts))

    best_value, best_index = incumbent
    nodes, exceeded = 0, False
    for value, index, count, stopped in results:
        if _is_better(value, index, best_value, best_index):
            best_value, best_index = value, index
        nodes += count
        exceeded |= stopped

    if exceeded:
        logger.warning('search stopped after %d candidates; returning the best menu found', nodes)

    index = np.asarray(best_index)
    settings = {'solver': 'exact', 'grid_m': m.grid_m, 'nodes': nodes, 'budget_exceeded': exceeded}
    menu = menu_from_index(index, m, settings)
    z, utility = adversary_best_response(menu, m)
    honest = (1 - m.rho) * float(m.shares @ menu['effective_price'].to_numpy())
    term = _adversary_term(menu, z, m)
    menu.solve_settings.update({'honest_revenue': honest, 'adversary_gain': utility})

    logger.info('adversarial revenue %.9g after %d candidates (adversary choice %d)', honest + term, nodes, z)
    return AdvSolution(menu, z, honest + term, honest, term, index, nodes, exceeded)


@dataclass(frozen=True)
class PoAdvResult:
    """Price of adversary, (1 - rho) R* / R_A.

    Args:
        value (float): The ratio, or UNBOUNDED (inf) when R_A <= 0.
        r_star (float): Optimal revenue without adversaries.
        r_adv_star (float): Realized revenue of the menu in the presence of adversaries.
        solver (str): How the menu was obtained.
        adversary_choice (int): Adversary best response to the menu.
        budget_exceeded (bool): Whether the exact search stopped at the node cap.
    """
    value: float
    r_star: float
    r_adv_star: float
    solver: str = 'exact'
    adversary_choice: int = 0
    budget_exceeded: bool = False

    @property
    def is_unbounded(self):
        return self.value == UNBOUNDED

    def __str__(self):
        return 'inf' if self.is_unbounded else '%.12g' % self.value

    def to_dict(self):
        return {
            'solver': self.solver,
            'r_star': self.r_star,
            'r_adv_star': self.r_adv_star,
            'poadv': self.value,
            'adversary_choice': self.adversary_choice,
            'budget_exceeded': self.budget_exceeded,
        }


def price_of_adversary(m, menu=None, solver='exact', node_cap=NODE_CAP, workers=None):
    """Computes the revenue penalty caused by adversarial buyers.

    Args:
        m (MarketModel): A valid market model.
        menu (ContractMenu): Menu to evaluate. Defaults to the menu produced by the solver.
        solver (str): 'exact', 'approx' or 'nonadv-menu'.
        node_cap (int): Node cap of the exact search.
        workers (int): Processes for the exact search.

    Returns:
        result (PoAdvResult): The price of adversary with the underlying revenues.
    """
    assert solver in SOLVERS, 'solver must be one of %s' % ', '.join(SOLVERS)
    nonadv = solve_nonadv(m)
    exceeded = False

    if menu is None and solver == 'approx':
        from .approx import approx_contracts
        outcome = approx_contracts(m, nonadv)
        if outcome.is_solve_adv:
            logger.info('approximation prescribes the exact adversarial solver')
        else:
            menu = outcome.menu

    if menu is None and solver == 'nonadv-menu':
        menu = nonadv.menu

    if menu is None:
        solution = solve_adv_exact(m, node_cap=node_cap, workers=workers)
        menu, exceeded = solution.menu, solution.budget_exceeded

    z, _ = adversary_best_response(menu, m)
    r_adv = realized_revenue(menu, z, m)
    value = UNBOUNDED if r_adv <= 0 else (1 - m.rho) * nonadv.revenue_star / r_adv
    return PoAdvResult(value, nonadv.revenue_star, r_adv, solver, z, exceeded)
