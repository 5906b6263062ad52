from dataclasses import asdict, dataclass, field, replace
from functools import cached_property

import numpy as np

from .functions import AdversaryCost, BenefitFunction


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by the validator and the solvers.

    Args:
        shape (float): Slack for monotonicity, concavity and ordering checks on the grid.
        ir_ic (float): Slack for participation and incentive constraints of a menu.
        intersection (float): Band around zero in which the cost and price curves are considered equal.
        bisection (float): Precision of the last intersection point.
        price_floor (float): Smallest price accepted as strictly positive.
    """
    shape: float = 1e-9
    ir_ic: float = 1e-7
    intersection: float = 1e-7
    bisection: float = 1e-10
    price_floor: float = 1e-9

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class MarketModel:
    """A contract design problem for one data bundle.

    Args:
        q (tuple): Shares of the honest buyer types, ordered from the lowest type.
        rho (float): Fraction of adversarial buyers, in [0, 1).
        gamma (float): Probability that an attack on a buyer is discovered and fined, in [0, 1].
        phi (float): Steady-revenue parameter, in (0, 1]. Prices must satisfy p >= (1 - phi)(p + gamma s).
        benefits (tuple): One BenefitFunction per honest type.
        cost (AdversaryCost): Cost the adversary imposes as a function of the privacy level.
        grid_m (int): Number of points of the privacy grid on [0, 1].
        s_max (float): Cap on the post-hoc fine.
        tolerances (Tolerances): Numerical tolerances.
        rng_seed (int): Seed for simulations and noisy answers.
        name (str): Optional label of the scenario.

    Examples:
        >>> model.n
        2
        >>> model.grid[:3]
        array([0.   , 0.001, 0.002])
    """
    q: tuple
    rho: float
    gamma: float
    phi: float
    benefits: tuple
    cost: AdversaryCost
    grid_m: int = 101
    s_max: float = 1e6
    tolerances: Tolerances = field(default_factory=Tolerances)
    rng_seed: int = 0
    name: str = None

    def __post_init__(self):
        object.__setattr__(self, 'q', tuple(float(value) for value in self.q))
        object.__setattr__(self, 'benefits', tuple(self.benefits))
        for name in ('rho', 'gamma', 'phi', 's_max'):
            object.__setattr__(self, name, float(getattr(self, name)))

        for benefit in self.benefits:
            info = 'benefits must be instances of BenefitFunction'
            if not isinstance(benefit, BenefitFunction): raise TypeError(info)

        if not isinstance(self.cost, AdversaryCost): raise TypeError('cost must be an instance of AdversaryCost')
        assert int(self.grid_m) == self.grid_m, 'grid size must be an integer'
        object.__setattr__(self, 'grid_m', int(self.grid_m))

    @property
    def n(self):
        """Number of honest buyer types."""
        return len(self.benefits)

    def benefit(self, i, eps):
        """Evaluates the benefit of type i (1-based) at eps."""
        return self.benefits[i - 1](eps)

    @cached_property
    def grid(self):
        """Uniform privacy grid on [0, 1] including both end points."""
        return np.linspace(0, 1, self.grid_m)

    @cached_property
    def shares(self):
        return np.asarray(self.q)

    @cached_property
    def tail_shares(self):
        """Returns Q[i] = q_i + ... + q_n for i = 1..n with Q[n + 1] = 0, stored 0-based."""
        tail = np.cumsum(self.shares[::-1])[::-1]
        return np.append(tail, 0.0)

    @cached_property
    def benefit_table(self):
        """Benefits of every type on the grid, shape (n, grid_m)."""
        rows = [benefit(self.grid) for benefit in self.benefits]
        return np.vstack(rows) if rows else np.empty((0, self.grid_m))

    @cached_property
    def cost_table(self):
        """Adversary cost on the grid."""
        return self.cost(self.grid)

    @cached_property
    def virtual_value_table(self):
        """Virtual values g_i on the grid, shape (n, grid_m).

        Summing g_i(eps_i) over the types gives the honest revenue of the menu
        that prices a monotone vector of privacy levels with tight constraints.
        """
        table = self.benefit_table
        upper = np.vstack([table[1:], np.zeros((1, self.grid_m))])
        tail = self.tail_shares
        return tail[:-1, None] * table - tail[1:, None] * upper

    @property
    def is_parametric(self):
        """Whether every benefit has a closed form."""
        return all(benefit.is_parametric for benefit in self.benefits)

    def replace(self, **changes):
        """Returns a copy of the model with some fields changed."""
        return replace(self, **changes)

    def restrict(self, n):
        """Returns the model restricted to the n lowest types with renormalized shares."""
        assert 1 <= n <= self.n, 'number of types must be between 1 and %d' % self.n
        q = self.shares[:n] / self.shares[:n].sum()
        return self.replace(q=q, benefits=self.benefits[:n])

    def to_dict(self):
        """Returns the scenario document of the model."""
        return {
            'name': self.name,
            'n': self.n,
            'q': list(self.q),
            'rho': self.rho,
            'gamma': self.gamma,
            'phi': self.phi,
            'benefits': [benefit.to_dict() for benefit in self.benefits],
            'cost': self.cost.to_dict(),
            'grid_m': self.grid_m,
            's_max': self.s_max,
            'tolerances': self.tolerances.to_dict(),
            'rng_seed': self.rng_seed,
        }

    @classmethod
    def from_dict(cls, data):
        """Creates a model from a scenario document."""
        benefits = data['benefits']
        benefits = [BenefitFunction.from_dict(item, type_index=i) for i, item in enumerate(benefits, start=1)]

        return cls(
            q=data['q'],
            rho=data['rho'],
            gamma=data['gamma'],
            phi=data['phi'],
            benefits=benefits,
            cost=AdversaryCost.from_dict(data['cost']),
            grid_m=data.get('grid_m', 101),
            s_max=data.get('s_max', 1e6),
            tolerances=Tolerances(**data.get('tolerances', {})),
            rng_seed=data.get('rng_seed', 0),
            name=data.get('name'),
        )

    def to_json(self, path):
        """Writes the model as a scenario file.

        Args:
            path (str): Location of the scenario file.
        """
        from .deserialize import write_scenario
        write_scenario(self, path)
