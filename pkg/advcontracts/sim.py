import logging
from dataclasses import dataclass
from sys import stdout

import numpy as np
import pandas as pd
from tqdm import tqdm

from .adv import adversary_best_response, honest_choices, honest_utilities, realized_revenue
from .model import check_menu

logger = logging.getLogger(__name__)

# Buyers drawn from one child stream of the seed.
BLOCK = 4096


@dataclass(frozen=True)
class SimConfig:
    """Settings of a simulation run.

    Args:
        menu (ContractMenu): Menu offered to every buyer.
        model (MarketModel): Market the buyers are drawn from.
        samples (int): Number of buyers.
        seed (int): Seed of the random streams.
    """
    menu: object
    model: object
    samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        assert int(self.samples) == self.samples and self.samples >= 1, 'samples must be a positive integer'
        assert len(self.menu) == self.model.n, 'menu must have one contract per type'


@dataclass(eq=False)
class SimReport:
    """Empirical outcome of a simulation run.

    Args:
        samples (int): Number of buyers.
        empirical_revenue (float): Average payment booked per buyer.
        std_error (float): Standard error of the average.
        analytical_revenue (float): Realized revenue of the menu.
        adversary_choice_mode (int): Contract bought by the adversaries, 0 when they opt out.
        choice_histogram (DataFrame): Buyers by true type (rows, 0 for adversaries) and choice (columns, 0 for opting out).
        payments (array): Total payment booked per true type, adversaries first.
    """
    samples: int
    empirical_revenue: float
    std_error: float
    analytical_revenue: float
    adversary_choice_mode: int
    choice_histogram: pd.DataFrame
    payments: np.ndarray

    @property
    def deviation(self):
        return self.empirical_revenue - self.analytical_revenue

    def is_consistent(self, k=3):
        """Whether the empirical revenue lies within k standard errors of the analytical revenue."""
        return abs(self.deviation) <= k * self.std_error

    def to_frame(self):
        """Returns one row per true type (0 for adversaries): share drawn, modal choice and mean payment."""
        counts = self.choice_histogram.sum(axis=1).to_numpy()
        modal = self.choice_histogram.to_numpy().argmax(axis=1)
        mean = np.divide(self.payments, counts, out=np.zeros(len(counts)), where=counts > 0)

        return pd.DataFrame({
            'type_index': self.choice_histogram.index.to_numpy(),
            'share': counts / self.samples,
            'modal_choice': np.where(counts > 0, modal, 0),
            'mean_payment': mean,
        })

    def describe(self):
        """Prints out the revenue estimate and the choices by type."""
        summary = pd.Series({
            'samples': self.samples,
            'empirical_revenue': self.empirical_revenue,
            'std_error': self.std_error,
            'analytical_revenue': self.analytical_revenue,
            'adversary_choice': self.adversary_choice_mode,
        })

        for title, table in [('Revenue', summary.to_string()), ('Choices', self.choice_histogram.to_string())]:
            print(title + '\n' + '-' * len(title))
            print(table, end='\n\n')


def _check_menu_values(menu, m):
    """Rejects menus that cannot be offered at all.

    IR and IC violations are only logged. Honest buyers then leave their own contract,
    which the simulation and the analytical revenue both follow.
    """
    eps = menu['eps'].to_numpy(dtype=float)
    assert np.all(np.isfinite(menu[['eps', 'price', 'fine']].to_numpy(dtype=float))), 'menu values must be finite'
    assert np.all((eps >= 0) & (eps <= 1)), 'privacy levels must be in [0, 1]'
    assert np.all(menu['price'] >= 0) and np.all(menu['fine'] >= 0), 'prices and fines must be non-negative'

    report = check_menu(menu, m)
    if not report.is_valid:
        logger.warning('simulating a menu that breaks %s', ', '.join(sorted(report.invariants)))


def _bar_format():
    value = "Elapsed: {elapsed} | "
    value += "Remaining: {remaining} | "
    value += "Progress: {l_bar}{bar}| "
    value += "blocks: {n}/{total} "
    return value


def simulate(cfg, verbose=True):
    """Simulates buyers best-responding to a menu.

    Each buyer is an adversary with probability rho and honest type i with probability
    (1 - rho) q_i. Honest buyers choose by expected utility, pay the price and, when
    attacked, the fine. Adversaries buy their best response and the seller books the
    price and fine net of the cost of misuse.

    Args:
        cfg (SimConfig): Simulation settings.
        verbose (bool): Whether to render a progress bar.

    Returns:
        report (SimReport): Empirical revenue and choices.
    """
    m, menu = cfg.model, cfg.menu
    _check_menu_values(menu, m)
    n, samples = m.n, int(cfg.samples)

    eps = menu['eps'].to_numpy(dtype=float)
    price = np.r_[0.0, menu['price'].to_numpy(dtype=float)]
    fine = np.r_[0.0, menu['fine'].to_numpy(dtype=float)]

    choices = np.r_[0, honest_choices(menu, m)]
    z, _ = adversary_best_response(menu, m)
    adversary_payment = price[z] + fine[z] - m.cost(eps[z - 1]) if z else 0.0
    choices[0] = z

    probabilities = np.r_[m.rho, (1 - m.rho) * np.asarray(m.q)]
    probabilities = probabilities / probabilities.sum()

    n_blocks = -(-samples // BLOCK)
    streams = np.random.SeedSequence(cfg.seed).spawn(n_blocks)
    counts = np.zeros((n + 1, n + 1), dtype=np.int64)
    payments = np.zeros(n + 1)
    total, squares = 0.0, 0.0

    progress_bar = tqdm(total=n_blocks, bar_format=_bar_format(), disable=not verbose, file=stdout)

    for b, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        size = min(BLOCK, samples - b * BLOCK)
        buyer = rng.choice(n + 1, size=size, p=probabilities)
        attacked = rng.random(size) < m.gamma

        chosen = choices[buyer]
        paid = price[chosen] + np.where(attacked, fine[chosen], 0.0)
        paid = np.where(buyer == 0, adversary_payment, paid)

        np.add.at(counts, (buyer, chosen), 1)
        np.add.at(payments, buyer, paid)
        total += paid.sum()
        squares += np.square(paid).sum()
        progress_bar.update(n=1)

    progress_bar.close()

    mean = total / samples
    variance = max(squares - samples * mean ** 2, 0.0) / (samples - 1) if samples > 1 else 0.0
    std_error = float(np.sqrt(variance / samples))
    analytical = realized_revenue(menu, z, m)
    logger.info('simulated %d buyers: revenue %.9g (std error %.3g), analytical %.9g', samples, mean, std_error, analytical)

    labels = pd.RangeIndex(0, n + 1)
    histogram = pd.DataFrame(counts, index=labels.rename('type_index'), columns=labels.rename('choice'))
    return SimReport(samples, float(mean), std_error, float(analytical), z, histogram, payments)


def check_ic_empirically(menu, m, tol=1e-9):
    """Lets every honest type pick from the menu and flags the types that leave their own contract.

    Args:
        menu (ContractMenu): The menu offered.
        m (MarketModel): The market model.
        tol (float): Utility difference treated as a tie with the own contract.

    Returns:
        table (DataFrame): Per type, the chosen contract (0 for opting out), the utility of the
            own contract, the best utility available and whether the type deviates.

    Examples:
        >>> from advcontracts.nonadv import solve_nonadv
        >>> table = check_ic_empirically(solve_nonadv(model).menu, model)
        >>> table['chosen'].tolist(), bool(table['flagged'].any())
        ([1, 2], False)
    """
    utility = honest_utilities(menu, m)
    own = np.diag(utility)
    best = np.maximum(utility.max(axis=1), 0.0)
    chosen = honest_choices(menu, m, tol=tol)

    return pd.DataFrame({
        'type_index': np.arange(1, m.n + 1),
        'chosen': chosen,
        'own_utility': own,
        'best_utility': best,
        'flagged': chosen != np.arange(1, m.n + 1),
    })
