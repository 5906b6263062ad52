import logging
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd

from ..exceptions import InvalidModelError

logger = logging.getLogger(__name__)

COLUMNS = ['invariant', 'type_index', 'eps', 'amount', 'message']


@dataclass(frozen=True)
class Violation:
    """A broken invariant together with where it breaks.

    Args:
        invariant (str): Name of the invariant.
        message (str): Description of the violation.
        type_index (int): Offending buyer type, if any.
        eps (float): Offending grid point, if any.
        amount (float): Size of the violation beyond the tolerance.
    """
    invariant: str
    message: str
    type_index: int = None
    eps: float = None
    amount: float = None


class ValidationReport:
    """The list of violated invariants. A model or menu is valid iff the report is empty."""

    def __init__(self, violations=None):
        self.violations = list(violations or [])

    def __iter__(self):
        return iter(self.violations)

    def __len__(self):
        return len(self.violations)

    def __repr__(self):
        return 'ValidationReport(%d violations)' % len(self)

    def add(self, invariant, message, type_index=None, eps=None, amount=None):
        violation = Violation(invariant, message, type_index, eps, amount)
        logger.debug('%s: %s', invariant, message)
        self.violations.append(violation)

    def extend(self, other):
        self.violations.extend(other.violations)

    @property
    def is_valid(self):
        return len(self.violations) == 0

    @property
    def invariants(self):
        """Names of the violated invariants."""
        return {violation.invariant for violation in self.violations}

    def to_frame(self):
        records = [asdict(violation) for violation in self.violations]
        return pd.DataFrame(records, columns=COLUMNS)

    def describe(self):
        """Prints out the violations."""
        if self.is_valid:
            print('No violations found', end='\n\n')
            return

        title = 'Violations (%d)' % len(self)
        print(title + '\n' + '-' * len(title), end='\n')
        frame = self.to_frame().set_index('invariant')
        print(frame.to_string(), end='\n\n')


def _first(mask):
    """Index of the first true entry."""
    return int(np.flatnonzero(mask)[0])


def _check_non_decreasing(values, grid, tol):
    """Returns the first grid point that lies below an earlier value, or None."""
    shortfall = np.maximum.accumulate(values) - values
    bad = shortfall > tol
    if not bad.any(): return None
    k = _first(bad)
    return grid[k], shortfall[k]


def _check_midpoints(values, grid, tol, concave=True):
    """Midpoint test over every pair of grid points whose midpoint lies on the grid."""
    sign = 1 if concave else -1
    for span in range(1, (len(values) - 1) // 2 + 1):
        middle = values[span:-span]
        chord = (values[:-2 * span] + values[2 * span:]) / 2
        shortfall = sign * (chord - middle)
        bad = shortfall > tol
        if bad.any():
            k = _first(bad)
            return grid[k + span], shortfall[k]


def _check_knot_slopes(eps, values, tol, concave=True):
    """Shape test on the knots of a piecewise-linear function."""
    eps, values = np.asarray(eps), np.asarray(values)
    slopes = np.diff(values) / np.diff(eps)
    change = np.diff(slopes) if concave else -np.diff(slopes)
    bad = change > tol
    if bad.any():
        k = _first(bad)
        return eps[k + 1], change[k]


def _check_shape(report, f, values, grid, tol, kind, type_index=None):
    """Checks the zero, monotonicity and curvature invariants of one function."""
    concave = kind == 'benefit'
    curvature = 'concave' if concave else 'convex'

    zero = float(f(0))
    zero_tol = 1e-12 if f.family == 'tabulated' else 0
    if abs(zero) > zero_tol:
        report.add(kind + '_zero', '%s must vanish at 0, got %g' % (kind, zero), type_index, 0.0, abs(zero))

    if f.family == 'tabulated':
        found = _check_non_decreasing(np.asarray(f.knots_values), np.asarray(f.knots_eps), tol)
    else:
        found = _check_non_decreasing(values, grid, tol)

    if found:
        eps, amount = found
        report.add(kind + '_monotone', '%s decreases at eps=%g' % (kind, eps), type_index, float(eps), float(amount))

    if f.family == 'tabulated':
        found = _check_knot_slopes(f.knots_eps, f.knots_values, tol, concave=concave)
    else:
        found = _check_midpoints(values, grid, tol, concave=concave)

    if found:
        eps, amount = found
        message = '%s is not %s at eps=%g' % (kind, curvature, eps)
        report.add('%s_%s' % (kind, curvature), message, type_index, float(eps), float(amount))


def _check_parameters(report, m):
    if len(m.q) != m.n:
        report.add('length', 'model has %d shares for %d types' % (len(m.q), m.n))

    if m.n < 1:
        report.add('length', 'model needs at least one type')

    total = sum(m.q)
    if abs(total - 1) > 1e-9:
        report.add('simplex', 'shares sum to %.12g' % total, amount=abs(total - 1))

    for i, share in enumerate(m.q, start=1):
        if share <= 0: report.add('share_positive', 'share of type %d is %g' % (i, share), i)

    if not 0 <= m.rho < 1: report.add('rho', 'adversary fraction must be in [0, 1), got %g' % m.rho)
    if not 0 <= m.gamma <= 1: report.add('gamma', 'attack probability must be in [0, 1], got %g' % m.gamma)
    if not 0 < m.phi <= 1: report.add('phi', 'steady-revenue parameter must be in (0, 1], got %g' % m.phi)
    if m.grid_m < 11: report.add('grid_m', 'grid needs at least 11 points, got %d' % m.grid_m)
    if not m.s_max > 0: report.add('s_max', 'fine cap must be positive, got %g' % m.s_max)


def _check_types(report, m):
    """Checks type ordering and increasing differences on the grid."""
    tol = m.tolerances.shape
    grid, table = m.grid, m.benefit_table

    for i in range(1, m.n):
        gap = table[i] - table[i - 1]

        bad = gap < -tol
        if bad.any():
            k = _first(bad)
            message = 'type %d benefits exceed type %d at eps=%g' % (i, i + 1, grid[k])
            report.add('type_ordering', message, i, float(grid[k]), float(-gap[k]))

        found = _check_non_decreasing(gap, grid, tol)
        if found:
            eps, amount = found
            message = 'types %d and %d break increasing differences at eps=%g' % (i, i + 1, eps)
            report.add('increasing_differences', message, i, float(eps), float(amount))


def validate_model(m):
    """Checks every modelling assumption of a market model.

    Args:
        m (MarketModel): The market model.

    Returns:
        report (ValidationReport): The violated invariants, empty if the model is valid.

    Examples:
        >>> validate_model(model).is_valid
        True
    """
    report = ValidationReport()
    _check_parameters(report, m)
    if m.grid_m < 2 or m.n < 1: return report

    tol = m.tolerances.shape
    for i, benefit in enumerate(m.benefits, start=1):
        _check_shape(report, benefit, m.benefit_table[i - 1], m.grid, tol, 'benefit', i)

    _check_shape(report, m.cost, m.cost_table, m.grid, tol, 'cost')
    _check_types(report, m)

    if not report.is_valid:
        logger.info('model has %d violations: %s', len(report), ', '.join(sorted(report.invariants)))

    return report


def check_model(m):
    """Raises InvalidModelError if the model breaks any invariant."""
    report = validate_model(m)
    if not report.is_valid: raise InvalidModelError(report)
    return report


def check_menu(menu, m, purchasers=None):
    """Checks monotone privacy levels and the honest IR, IC and SR constraints of a menu.

    Args:
        menu (ContractMenu): The menu, one row per honest type.
        m (MarketModel): The market model.
        purchasers (array): Optional mask of the types expected to buy. IR is
            only checked for these types, and IC only for their own rows.

    Returns:
        report (ValidationReport): The violated constraints, empty if the menu is valid.
    """
    report = ValidationReport()
    tol = m.tolerances.ir_ic
    eps = menu['eps'].to_numpy(dtype=float)
    price = menu['price'].to_numpy(dtype=float)
    fine = menu['fine'].to_numpy(dtype=float)
    effective = price + m.gamma * fine
    assert len(eps) == m.n, 'menu must have one contract per type'

    if purchasers is None: purchasers = np.ones(m.n, dtype=bool)

    steps = np.diff(eps)
    if (steps < 0).any():
        i = _first(steps < 0) + 1
        report.add('monotone', 'privacy level of type %d exceeds type %d' % (i, i + 1), i, float(eps[i - 1]))

    # utility[i, j] is the utility of type i + 1 for contract j + 1.
    utility = np.vstack([benefit(eps) for benefit in m.benefits]) - effective[None, :]
    own = np.diag(utility)

    for i in np.flatnonzero(purchasers):
        if own[i] < -tol:
            report.add('ir', 'type %d has negative utility %g' % (i + 1, own[i]), i + 1, float(eps[i]), float(-own[i]))

        regret = utility[i] - own[i]
        if (regret > tol).any():
            j = int(np.argmax(regret))
            message = 'type %d prefers contract %d by %g' % (i + 1, j + 1, regret[j])
            report.add('ic', message, i + 1, float(eps[j]), float(regret[j]))

    floor = (1 - m.phi) * effective
    for i in range(m.n):
        if price[i] < floor[i] - tol:
            message = 'price %g of type %d is below the steady-revenue floor %g' % (price[i], i + 1, floor[i])
            report.add('sr', message, i + 1, float(eps[i]), float(floor[i] - price[i]))

        if price[i] < -tol or fine[i] < -tol:
            report.add('sign', 'contract %d has a negative price or fine' % (i + 1), i + 1, float(eps[i]))

    return report
