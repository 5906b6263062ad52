import json
import os
import shutil

import numpy as np
import pytest
from pytest import raises

from advcontracts.dp import BudgetLedger
from advcontracts.exceptions import BudgetExceeded, DuplicateQueryType


@pytest.fixture
def path():
    pwd = os.path.dirname(__file__)
    path = os.path.join(pwd, '.cache')
    os.makedirs(path, exist_ok=True)
    yield path
    shutil.rmtree(path)


def test_duplicate():
    ledger = BudgetLedger('b', 1.0)
    ledger.charge('mean(age)', 0.2)
    ledger.charge('mean(systolic_bp)', 0.2)

    with raises(DuplicateQueryType, match='already answered'):
        ledger.charge('mean(age)', 0.1)

    assert ledger.spent == pytest.approx(0.4)


def test_budget_is_atomic():
    ledger = BudgetLedger('b', 1.0)
    ledger.charge('count', 0.7)

    with raises(BudgetExceeded, match='exceeds the budget'):
        ledger.charge('sum(age)', 0.31)

    assert ledger.used_types == {'count'}
    ledger.charge('sum(age)', 0.3)
    assert ledger.remaining == pytest.approx(0.0, abs=1e-12)


def test_exact_split():
    ledger = BudgetLedger('b', 1.0)
    for k in range(10):
        ledger.charge('q%d' % k, 0.1)

    assert ledger.spent == pytest.approx(1.0)
    with raises(BudgetExceeded):
        ledger.charge('extra', 1e-6)


def test_random_sequences_never_overspend():
    rng = np.random.default_rng(0)
    for _ in range(100):
        ledger = BudgetLedger('b', rng.uniform(0.1, 2.0))
        for k in range(20):
            key = 'q%d' % rng.integers(0, 8)
            try:
                ledger.charge(key, rng.uniform(0.01, 0.5))
            except (BudgetExceeded, DuplicateQueryType):
                pass

            assert ledger.spent <= ledger.purchased_eps + 1e-12
            assert len(ledger.used_types) == len(ledger.to_frame())


def test_to_frame():
    ledger = BudgetLedger('b', 1.0)
    ledger.charge('count', 0.25)
    ledger.charge('sum(age)', 0.5)
    frame = ledger.to_frame()
    assert frame['query'].tolist() == ['count', 'sum(age)']
    assert frame['eps'].tolist() == [0.25, 0.5]


def test_journal_replay(path):
    journal = os.path.join(path, 'ledger.jsonl')
    ledger = BudgetLedger('buyer-7', 1.0, journal=journal)
    ledger.charge('count', 0.25)
    ledger.charge('mean(age)', 0.5)

    with raises(BudgetExceeded):
        ledger.charge('sum(age)', 0.5)

    with open(journal, 'r') as file:
        events = [json.loads(line)['event'] for line in file]

    assert events == ['open', 'charge', 'charge']

    replayed = BudgetLedger.replay(journal)
    assert replayed.buyer_id == 'buyer-7'
    assert replayed.consumed == ledger.consumed

    with raises(DuplicateQueryType):
        replayed.charge('count', 0.1)

    replayed.charge('sum(age)', 0.25)
    assert BudgetLedger.replay(journal).remaining == pytest.approx(0.0, abs=1e-12)


def test_failed_journal_write_leaves_ledger(path):
    journal = os.path.join(path, 'ledger.jsonl')
    ledger = BudgetLedger('buyer-7', 1.0, journal=journal)
    ledger.charge('count', 0.25)

    ledger.journal = path
    with raises(OSError):
        ledger.charge('mean(age)', 0.5)

    assert ledger.used_types == {'count'}
    assert ledger.remaining == pytest.approx(0.75)

    ledger.journal = journal
    ledger.charge('mean(age)', 0.5)
    assert BudgetLedger.replay(journal).consumed == ledger.consumed
