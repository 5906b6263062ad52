import json
import logging
import math
import threading

import pandas as pd

from ..exceptions import BudgetExceeded, DuplicateQueryType

logger = logging.getLogger(__name__)

# Rounding allowed when the charged budgets add up to the purchase.
BUDGET_SLACK = 1e-12


class BudgetLedger:
    """Privacy budget of one buyer's bundle.

    Every query type can be charged once and the charges never exceed the purchased
    privacy level. When a journal path is given, the opening of the ledger and every
    charge are appended to it as JSON lines.

    Args:
        buyer_id (str): Buyer holding the bundle.
        purchased_eps (float): Privacy level of the contract bought.
        journal (str): Optional append-only journal file.

    Examples:
        >>> ledger = BudgetLedger('buyer-1', purchased_eps=1.0)
        >>> ledger.charge('count', 0.25)
        >>> round(ledger.remaining, 2)
        0.75
    """

    def __init__(self, buyer_id, purchased_eps, journal=None):
        assert purchased_eps >= 0, 'purchased privacy level must be non-negative'
        self.buyer_id = str(buyer_id)
        self.purchased_eps = float(purchased_eps)
        self.consumed = {}
        self.journal = journal
        self._lock = threading.Lock()
        self._write({'event': 'open', 'buyer_id': self.buyer_id, 'purchased_eps': self.purchased_eps})

    @property
    def spent(self):
        return math.fsum(self.consumed.values())

    @property
    def remaining(self):
        return self.purchased_eps - self.spent

    @property
    def used_types(self):
        return set(self.consumed)

    def _write(self, record):
        if self.journal is None: return
        with open(self.journal, 'a') as file:
            file.write(json.dumps(record, sort_keys=True) + '\n')

    def _check(self, key, eps):
        if key in self.consumed:
            raise DuplicateQueryType('query type %s was already answered for %s' % (key, self.buyer_id))

        total = math.fsum([self.spent, eps])
        if total > self.purchased_eps + BUDGET_SLACK:
            info = 'charging %g to %s exceeds the budget (%g of %g spent)'
            raise BudgetExceeded(info % (eps, key, self.spent, self.purchased_eps))

    def charge(self, key, eps):
        """Charges a query type, either fully or not at all.

        Args:
            key (str): Query type, e.g. 'count' or 'mean(age)'.
            eps (float): Privacy level spent on the query.
        """
        assert eps > 0, 'privacy level of a query must be positive'
        with self._lock:
            self._check(key, eps)
            # Journal first: a failed write leaves the ledger unchanged.
            self._write({'event': 'charge', 'query': key, 'eps': float(eps)})
            self.consumed[key] = float(eps)

        logger.debug('%s charged %g to %s, %g left', self.buyer_id, eps, key, self.remaining)

    def to_frame(self):
        """Returns the charges in order as (query, eps)."""
        return pd.DataFrame(list(self.consumed.items()), columns=['query', 'eps'])

    @classmethod
    def replay(cls, journal):
        """Rebuilds a ledger from its journal. Later charges are appended to the same journal.

        Args:
            journal (str): Location of the journal.

        Returns:
            ledger (BudgetLedger): The ledger in the state the journal records.
        """
        with open(journal, 'r') as file:
            records = [json.loads(line) for line in file if line.strip()]

        assert records and records[0]['event'] == 'open', 'journal must start with an open record'
        ledger = cls(records[0]['buyer_id'], records[0]['purchased_eps'])

        for record in records[1:]:
            assert record['event'] == 'charge', 'unknown journal event %s' % record['event']
            ledger.charge(record['query'], record['eps'])

        ledger.journal = journal
        return ledger
