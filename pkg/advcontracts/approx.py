import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from .adv import UNBOUNDED, honest_choices
from .exceptions import ClassificationError, NoBoundError
from .menu import Contract, ContractMenu
from .model import ValidationReport, check_menu
from .nonadv import solve_nonadv

logger = logging.getLogger(__name__)

HIGH = 'High'
LOW = 'Low'
INTERMEDIATE = 'Intermediate'


@dataclass(frozen=True)
class CostClass:
    """Position of the adversary cost relative to the price-contract curve.

    Args:
        kind (str): 'High', 'Low' or 'Intermediate'.
        eps_M (float): Last privacy level where the cost crosses the curve (Intermediate only).
        delta (float): Largest excess of the cost over the curve before eps_M (Intermediate only).
    """
    kind: str
    eps_M: float = None
    delta: float = None

    def to_dict(self):
        return {'kind': self.kind, 'eps_M': self.eps_M, 'delta': self.delta}


@dataclass(frozen=True)
class SlackContract:
    """A non-adversarial contract with the least fine that bounds the adversary gain by delta.

    Args:
        base (Contract): The non-adversarial contract (p, eps, 0).
        fine (float): The least feasible fine s.
        new_price (float): p - gamma s.
        delta (float): Bound on the adversary gain.
        lam (float): Lower bound on the new price.
    """
    base: Contract
    fine: float
    new_price: float
    delta: float
    lam: float

    @property
    def contract(self):
        """The contract offered, (p - gamma s, eps, s)."""
        return Contract(self.new_price, self.base.eps, self.fine)

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Infeasible:
    """No fine makes the contract delta-slack and lambda-priced."""
    reason: str
    base: Contract = None

    def __bool__(self):
        return False


def classify_cost(curve, c, m):
    """Classifies the adversary cost against the price-contract curve.

    The sign of C - P is read on the grid without eps = 0. Values within the intersection
    tolerance of zero count as touching. The last crossing is refined by root finding.

    Args:
        curve (CurveTable): Price-contract curve on [0, 1].
        c (AdversaryCost): The adversary cost.
        m (MarketModel): The market model.

    Returns:
        cost_class (CostClass): The classification.

    Examples:
        >>> classify_cost(solve_nonadv(model).curve, model.cost, model).kind
        'Intermediate'
    """
    grid = m.grid
    tol = m.tolerances.intersection
    cost = m.cost_table if c is m.cost else c(grid)
    tabulated = np.array_equal(curve.grid, grid)
    difference = cost - (curve.values if tabulated else curve(grid))
    sign = np.where(difference > tol, 1, np.where(difference < -tol, -1, 0))[1:]

    touching = (sign[1:] == 0) & (sign[:-1] == 0)
    if touching.any():
        k = int(np.flatnonzero(touching)[0]) + 1
        raise ClassificationError('adversary cost follows the price-contract curve from eps=%g' % grid[k])

    signed = np.flatnonzero(sign)
    if (sign[signed] > 0).all(): return CostClass(HIGH)
    if (sign[signed] < 0).all(): return CostClass(LOW)

    changes = np.flatnonzero(np.diff(sign[signed]) != 0)
    left, right = signed[changes[-1]] + 1, signed[changes[-1] + 1] + 1

    def excess(eps):
        return c(eps) - curve(eps)

    eps_M = brentq(excess, grid[left], grid[right], xtol=m.tolerances.bisection)
    before = difference[grid < eps_M]
    delta = max(float(before.max()), 0.0)
    logger.info('intermediate cost: last crossing at %.10g, delta %.9g', eps_M, delta)
    return CostClass(INTERMEDIATE, float(eps_M), delta)


def make_slack_contract(contract, delta, lam, m):
    """Adds the least fine that bounds the adversary gain of a contract by delta.

    Args:
        contract (Contract): Non-adversarial contract (p, eps, 0).
        delta (float): Bound on the adversary gain C(eps) - (p - gamma s) - s.
        lam (float): Lower bound on the new price p - gamma s.
        m (MarketModel): The market model.

    Returns:
        result (SlackContract or Infeasible): The fined contract, or why none exists.

    Examples:
        >>> from advcontracts.menu import Contract
        >>> m = model.replace(gamma=0.1, phi=0.95)
        >>> slack = make_slack_contract(Contract(0.75, 0.138629, 0), 0, 0, m)
        >>> round(slack.fine, 6), round(slack.new_price, 6)
        (0.157987, 0.734201)
        >>> bool(make_slack_contract(Contract(0.75, 0.138629, 0), 0, 0.74, m))
        False
    """
    price = contract.price
    assert price >= 0, 'price must be non-negative'
    excess = m.cost(contract.eps) - price - delta

    if excess <= 1e-9:
        fine = 0.0
    elif m.gamma >= 1:
        return Infeasible('fines cannot lower the adversary gain when attacks are always caught', contract)
    else:
        fine = excess / (1 - m.gamma)

    new_price = price - m.gamma * fine
    if fine > m.s_max:
        return Infeasible('fine %g exceeds the cap %g' % (fine, m.s_max), contract)

    if new_price < lam:
        return Infeasible('price %g falls below %g' % (new_price, lam), contract)

    if new_price < (1 - m.phi) * price:
        return Infeasible('price %g breaks the steady-revenue floor' % new_price, contract)

    return SlackContract(contract, fine, new_price, delta, lam)


@dataclass(eq=False)
class ApproxOutcome:
    """The result of the approximation algorithm.

    Args:
        cost_class (CostClass): Classification of the adversary cost.
        branch (str): 'low', 'high', 'original', 'modified' or 'solve_adv'.
        menu (ContractMenu): Menu offered, None when the exact solver is prescribed.
        assignment (array): Non-adversarial contract (1-based) whose privacy level each type receives, 0 for none.
        r_star (float): Optimal non-adversarial revenue.
        K (int): Highest type whose privacy level lies at or below eps_M (Intermediate only).
        alpha (float): Largest adversary gain over the non-adversarial contracts.
        beta (float): Largest adversary gain over the modified contracts.
        r_check (float): Honest revenue of the modified contracts.
        lam (float): Price bound certified by the High-case contract.
        slack (dict): Slack contracts by non-adversarial contract index.
        branch_disagrees (bool): Whether clipping alpha and beta at zero would pick the other menu.
    """
    cost_class: CostClass
    branch: str
    menu: ContractMenu = None
    assignment: np.ndarray = None
    r_star: float = None
    K: int = None
    alpha: float = None
    beta: float = None
    r_check: float = None
    lam: float = None
    slack: dict = field(default_factory=dict)
    branch_disagrees: bool = False
    report: ValidationReport = None

    @property
    def kind(self):
        return self.cost_class.kind

    @property
    def is_solve_adv(self):
        """Whether the adversarial problem must be solved from scratch."""
        return self.menu is None

    def to_frame(self):
        """Returns the per-type assignment table."""
        if self.is_solve_adv: return pd.DataFrame(columns=['type_index', 'assigned', 'eps', 'price', 'fine', 'effective_price'])
        frame = pd.DataFrame(self.menu).reset_index()
        frame.insert(1, 'assigned', self.assignment)
        return frame

    def summary(self):
        return {
            'kind': self.kind,
            'branch': self.branch,
            'eps_M': self.cost_class.eps_M,
            'delta': self.cost_class.delta,
            'K': self.K,
            'alpha': self.alpha,
            'beta': self.beta,
            'r_check': self.r_check,
            'r_star': self.r_star,
            'branch_disagrees': self.branch_disagrees,
        }


def _settings(branch, cost_class):
    return {'solver': 'approx', 'branch': branch, 'cost_class': cost_class.kind}


def _solve_high(sol, cost_class, m):
    contracts = sol.menu.contracts
    lam = m.tolerances.price_floor
    feasible = {}
    for k, contract in enumerate(contracts, start=1):
        slack = make_slack_contract(contract, 0.0, lam, m)
        if slack: feasible[k] = slack

    if not feasible:
        logger.info('no contract can be made 0-slack with a positive price')
        return ApproxOutcome(cost_class, 'solve_adv', r_star=sol.revenue_star)

    j = max(feasible, key=lambda k: (contracts[k - 1].price, -k))
    offer = feasible[j].contract
    menu = ContractMenu.from_contracts([offer] * m.n, m.gamma, _settings('high', cost_class))
    choices = honest_choices(menu, m)
    assignment = np.where(choices > 0, j, 0)

    return ApproxOutcome(
        cost_class,
        'high',
        menu,
        assignment,
        r_star=sol.revenue_star,
        lam=contracts[j - 1].price,
        slack={j: feasible[j]},
    )


def _original(nonadv, cost_class):
    menu = nonadv.menu.copy()
    menu.solve_settings = _settings('original', cost_class)
    return menu


def inter_c_app(nonadv, cost_class, m):
    """Adds fines to the contracts above the last crossing of the cost and the curve.

    Types up to K keep their contracts. Each higher type receives the delta-slack,
    p*_K-priced contract it likes best. The original menu is kept when it promises more
    revenue once the adversary gain is accounted for.

    Args:
        nonadv (NonAdvSolution): The non-adversarial solution.
        cost_class (CostClass): An Intermediate classification.
        m (MarketModel): The market model.

    Returns:
        outcome (ApproxOutcome): The menu with its assignment and the quantities of the comparison.
    """
    assert cost_class.kind == INTERMEDIATE, 'cost must be intermediate'
    eps_star = nonadv.eps_star
    contracts = nonadv.menu.contracts
    p_star = np.array([contract.price for contract in contracts])
    r_star = nonadv.revenue_star
    below = np.flatnonzero(eps_star <= cost_class.eps_M)
    if len(below) == 0:
        logger.info('every privacy level lies above the last crossing; keeping the original menu')
        alpha = float((m.cost(eps_star) - p_star).max())
        return ApproxOutcome(cost_class, 'original', _original(nonadv, cost_class), np.arange(1, m.n + 1), r_star, K=0, alpha=alpha)

    K = int(below[-1]) + 1
    safe_set = {}
    for k in range(K, m.n + 1):
        slack = make_slack_contract(contracts[k - 1], cost_class.delta, p_star[K - 1], m)
        if slack: safe_set[k] = slack

    assert K in safe_set, 'contract %d must be %g-slack' % (K, cost_class.delta)
    candidates = sorted(safe_set)

    assignment = np.arange(1, m.n + 1)
    offers = list(contracts)
    at = np.array(candidates) - 1
    for i in range(K + 1, m.n + 1):
        utility = m.benefit(i, eps_star[at]) - p_star[at]
        safe = candidates[int(np.argmax(utility))]
        assignment[i - 1] = safe
        offers[i - 1] = safe_set[safe].contract

    r_check = float(m.shares @ p_star[assignment - 1])
    gains = m.cost(eps_star) - p_star
    alpha = float(gains.max())
    # Fined offers keep their effective price, so their gain drops by (1 - gamma) s.
    fines = np.array([offer.fine for offer in offers])
    beta = float((gains[assignment - 1] - (1 - m.gamma) * fines).max())

    rho = m.rho
    keep = (1 - rho) * r_star - rho * alpha > (1 - rho) * r_check - rho * beta
    keep_clipped = (1 - rho) * r_star - rho * max(alpha, 0) > (1 - rho) * r_check - rho * max(beta, 0)
    if keep != keep_clipped:
        logger.warning('clipping the adversary gains at zero would select the %s menu', 'original' if keep_clipped else 'modified')

    outcome = ApproxOutcome(
        cost_class,
        'original' if keep else 'modified',
        _original(nonadv, cost_class) if keep else ContractMenu.from_contracts(offers, m.gamma, _settings('modified', cost_class)),
        np.arange(1, m.n + 1) if keep else assignment,
        r_star,
        K=K,
        alpha=alpha,
        beta=beta,
        r_check=r_check,
        lam=float(p_star[K - 1]),
        slack=safe_set,
        branch_disagrees=keep != keep_clipped,
    )

    logger.info('intermediate cost: K=%d, alpha %.6g, beta %.6g, returning the %s menu', K, alpha, beta, outcome.branch)
    return outcome


def _check_outcome(outcome, m):
    """Checks IR, IC and SR for every honest type that buys."""
    purchasers = outcome.assignment > 0
    report = check_menu(outcome.menu, m, purchasers=purchasers)
    if not report.is_valid:
        logger.warning('approximate menu breaks honest constraints: %s', ', '.join(sorted(report.invariants)))
    return report


def approx_contracts(m, nonadv=None):
    """Runs the approximation algorithm on the non-adversarial contracts.

    A Low cost keeps the original contracts. A High cost offers every type the 0-slack
    contract with the highest price, or prescribes the exact solver when none exists. An
    Intermediate cost delegates to ``inter_c_app``.

    Args:
        m (MarketModel): A valid market model.
        nonadv (NonAdvSolution): Non-adversarial solution. Solved when omitted.

    Returns:
        outcome (ApproxOutcome): The approximate menu, or the directive to solve exactly.
    """
    sol = nonadv or solve_nonadv(m)
    cost_class = classify_cost(sol.curve, m.cost, m)

    if cost_class.kind == LOW:
        menu = sol.menu.copy()
        menu.solve_settings = _settings('low', cost_class)
        outcome = ApproxOutcome(cost_class, 'low', menu, np.arange(1, m.n + 1), sol.revenue_star)
    elif cost_class.kind == HIGH:
        outcome = _solve_high(sol, cost_class, m)
    else:
        outcome = inter_c_app(sol, cost_class, m)

    # Low and original branches offer the non-adversarial menu, which is IR and IC already.
    if outcome.branch in ('high', 'modified'): outcome.report = _check_outcome(outcome, m)
    elif not outcome.is_solve_adv: outcome.report = ValidationReport()
    return outcome


def poadv_bound(outcome, cost_class, m):
    """Upper bound on the price of adversary of the approximate menu.

    Args:
        outcome (ApproxOutcome): Output of ``approx_contracts``.
        cost_class (CostClass): The cost classification.
        m (MarketModel): The market model.

    Returns:
        bound (float): 1 for Low costs. R* / (lam min q) for High costs.
            R* / max(R_K - delta rho / (1 - rho), R* - alpha rho / (1 - rho)) for Intermediate
            costs, with alpha clipped at zero, or inf when the denominator is not positive. When
            the clipped comparison disagrees with the selected branch only the denominator of
            the returned menu is used.
    """
    if cost_class.kind == LOW: return 1.0
    r_star = outcome.r_star

    if cost_class.kind == HIGH:
        if outcome.is_solve_adv: raise NoBoundError('no bound exists when no 0-slack contract is available')
        return r_star / (outcome.lam * min(m.q))

    ratio = m.rho / (1 - m.rho)
    original = r_star - max(outcome.alpha, 0) * ratio
    if not outcome.K: denominator = original
    else:
        modified = outcome.r_check - cost_class.delta * ratio
        if not outcome.branch_disagrees: denominator = max(original, modified)
        else: denominator = modified if outcome.branch == 'modified' else original

    return UNBOUNDED if denominator <= 0 else r_star / denominator
