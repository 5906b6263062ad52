import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from sys import stdout

import pandas as pd
from tqdm import tqdm

from .adv import NODE_CAP, SOLVERS, _worker_count, price_of_adversary, solve_adv_exact
from .approx import approx_contracts
from .nonadv import solve_nonadv

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ['gamma', 'rho', 'solver', 'r_star', 'r_adv_star', 'poadv', 'adversary_choice', 'budget_exceeded']
BENCH_COLUMNS = ['n', 'wall_ms_nonadv', 'wall_ms_exact', 'wall_ms_approx']


@dataclass(frozen=True)
class SweepSpec:
    """Grid of attack probabilities and adversary fractions.

    Args:
        gammas (tuple): Attack probabilities.
        rhos (tuple): Adversary fractions.
        solver (str): How the menu at each point is obtained, 'exact', 'approx' or 'nonadv-menu'.

    Examples:
        >>> spec = SweepSpec([0.1, 0.5], [0.2], solver='approx')
        >>> spec.points
        [(0.1, 0.2), (0.5, 0.2)]
    """
    gammas: tuple
    rhos: tuple
    solver: str = 'nonadv-menu'

    def __post_init__(self):
        object.__setattr__(self, 'gammas', tuple(map(float, self.gammas)))
        object.__setattr__(self, 'rhos', tuple(map(float, self.rhos)))
        assert self.gammas and self.rhos, 'sweep grids must not be empty'
        assert all(0 <= value < 1 for value in self.gammas + self.rhos), 'sweep values must be in [0, 1)'
        assert self.solver in SOLVERS, 'solver must be one of %s' % ', '.join(SOLVERS)

    @property
    def points(self):
        """Grid points in canonical order, attack probability first."""
        return list(product(self.gammas, self.rhos))


def _sweep_point(args):
    m, gamma, rho, solver, node_cap = args
    result = price_of_adversary(m.replace(gamma=gamma, rho=rho), solver=solver, node_cap=node_cap, workers=1)
    return {'gamma': gamma, 'rho': rho, **result.to_dict()}


def _bar_format(unit):
    value = "Elapsed: {elapsed} | "
    value += "Remaining: {remaining} | "
    value += "Progress: {l_bar}{bar}| "
    value += unit + ": {n}/{total} "
    return value


def sweep(m, spec, node_cap=NODE_CAP, workers=None, verbose=True):
    """Computes the price of adversary over a grid of attack probabilities and adversary fractions.

    Points run in a process pool when more than one worker is configured. Rows come back
    in canonical order regardless of the pool.

    Args:
        m (MarketModel): The market model. Its gamma and rho are replaced at every point.
        spec (SweepSpec): The grid and the solver.
        node_cap (int): Node cap of the exact search.
        workers (int): Processes. Defaults to the ADVCONTRACTS_WORKERS environment variable.
        verbose (bool): Whether to render a progress bar.

    Returns:
        sweep (DataFrame): One row per (gamma, rho), PoAdv inf when unbounded.
    """
    tasks = [(m, gamma, rho, spec.solver, node_cap) for gamma, rho in spec.points]
    workers = _worker_count(workers)
    progress_bar = tqdm(total=len(tasks), bar_format=_bar_format('points'), disable=not verbose, file=stdout)
    rows = []

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            for row in executor.map(_sweep_point, tasks):
                rows.append(row)
                progress_bar.update(n=1)
    else:
        for task in tasks:
            rows.append(_sweep_point(task))
            progress_bar.update(n=1)

    progress_bar.close()
    logger.info('swept %d points with the %s solver', len(rows), spec.solver)
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def _wall_ms(function, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        function()
        times.append(time.perf_counter() - start)

    return 1000 * min(times)


def bench(m, sizes, repeats=3, node_cap=NODE_CAP, prune=False, verbose=True):
    """Times the solvers on the model restricted to its lowest types.

    The exact solver enumerates every monotone vector unless pruning is enabled.

    Args:
        m (MarketModel): The market model.
        sizes (list[int]): Numbers of types to restrict to.
        repeats (int): Runs per solver, the fastest is reported.
        node_cap (int): Node cap of the exact search.
        prune (bool): Whether the exact search prunes by its bound.
        verbose (bool): Whether to render a progress bar.

    Returns:
        bench (DataFrame): Wall time in milliseconds of each solver per number of types.
    """
    assert repeats >= 1, 'repeats must be positive'
    rows = []

    for n in tqdm(sizes, bar_format=_bar_format('sizes'), disable=not verbose, file=stdout):
        restricted = m.restrict(n)
        rows.append({
            'n': n,
            'wall_ms_nonadv': _wall_ms(lambda: solve_nonadv(restricted), repeats),
            'wall_ms_exact': _wall_ms(lambda: solve_adv_exact(restricted, node_cap=node_cap, workers=1, prune=prune), repeats),
            'wall_ms_approx': _wall_ms(lambda: approx_contracts(restricted), repeats),
        })
        logger.debug('timed n=%d: %s', n, rows[-1])

    return pd.DataFrame(rows, columns=BENCH_COLUMNS)
