import re
from dataclasses import dataclass

import numpy as np

KINDS = ('count', 'sum', 'mean')
PATTERN = re.compile(r'^(count|sum|mean)(?:\((\w+)\))?$')


@dataclass(frozen=True)
class Query:
    """A statistical query with the privacy level the buyer assigns to it.

    Args:
        kind (str): 'count', 'sum' or 'mean'.
        eps (float): Privacy level spent on the answer.
        column (str): Column summed or averaged.

    Examples:
        >>> Query.parse('mean(age)', 0.5).key
        'mean(age)'
    """
    kind: str
    eps: float
    column: str = None

    def __post_init__(self):
        assert self.kind in KINDS, 'query kind must be one of %s' % ', '.join(KINDS)
        assert self.eps > 0, 'privacy level of a query must be positive'
        if self.kind == 'count': assert self.column is None, 'count queries take no column'
        else: assert self.column, '%s queries need a column' % self.kind

    @property
    def key(self):
        """Query type charged on the ledger. Every column is its own type."""
        return self.kind if self.kind == 'count' else '%s(%s)' % (self.kind, self.column)

    @classmethod
    def parse(cls, text, eps):
        match = PATTERN.match(text.replace(' ', ''))
        assert match, 'cannot parse query %r' % text
        return cls(match.group(1), float(eps), match.group(2))

    @classmethod
    def from_dict(cls, data):
        return cls.parse(data['query'], data['eps'])


def laplace_noise(scale, rng, size=None):
    """Draws Laplace noise by inverting the distribution function.

    Args:
        scale (float): Scale b of the distribution.
        rng (Generator): Source of uniform draws.
        size (int): Number of draws. Returns a float when omitted.

    Returns:
        noise (float or array): Draws with standard deviation sqrt(2) b.
    """
    assert scale >= 0, 'scale must be non-negative'
    u = rng.random(size) - 0.5
    return -scale * np.sign(u) * np.log1p(-2 * np.abs(u))


def sensitivity(query, ds):
    """Largest change of the exact answer when one record changes.

    Args:
        query (Query): The query.
        ds (Dataset): The dataset, whose size is public.

    Returns:
        value (float): 1 for counts, the column range for sums, the range over the size for means.
    """
    if query.kind == 'count': return 1.0
    _, (lower, upper) = ds.column(query.column)
    width = upper - lower
    return width if query.kind == 'sum' else width / ds.size


def exact_answer(query, ds):
    if query.kind == 'count': return float(ds.size)
    values, _ = ds.column(query.column)
    return float(values.sum() if query.kind == 'sum' else values.mean())


def laplace_mechanism(query, ds, rng, size=None):
    """Answers a query with Laplace noise scaled to its sensitivity, without touching any ledger."""
    scale = sensitivity(query, ds) / query.eps
    return exact_answer(query, ds) + laplace_noise(scale, rng, size)


def answer_query(ledger, query, ds, seed=None):
    """Answers a query from a buyer's bundle.

    The ledger is charged only when the query can be answered.

    Args:
        ledger (BudgetLedger): The buyer's budget.
        query (Query): The query and its privacy level.
        ds (Dataset): The dataset.
        seed (int or Generator): Source of the noise.

    Returns:
        answer (float): Exact answer plus Laplace noise of scale sensitivity / eps.

    Examples:
        >>> import pandas as pd
        >>> from advcontracts.dp import BudgetLedger, Dataset
        >>> ds = Dataset(pd.DataFrame({'age': [30, 40]}), {'age': (0, 100)})
        >>> answer = answer_query(BudgetLedger('b', 1.0), Query('count', 1e6), ds, seed=0)
        >>> abs(answer - 2) < 1e-3
        True
    """
    sensitivity(query, ds)
    ledger.charge(query.key, query.eps)
    return float(laplace_mechanism(query, ds, np.random.default_rng(seed)))
