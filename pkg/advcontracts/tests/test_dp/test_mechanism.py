import numpy as np
import pytest
from pytest import raises

from advcontracts.demos import load_patients
from advcontracts.dp import (
    BudgetLedger,
    Query,
    answer_query,
    exact_answer,
    laplace_mechanism,
    sensitivity
)
from advcontracts.exceptions import BudgetExceeded, UnknownColumn


@pytest.fixture(scope='module')
def patients():
    return load_patients()


def test_parse():
    query = Query.parse('sum( systolic_bp )', 0.5)
    assert (query.kind, query.column, query.eps) == ('sum', 'systolic_bp', 0.5)
    assert Query.from_dict({'query': 'count', 'eps': 1}).key == 'count'

    with raises(AssertionError, match='cannot parse'):
        Query.parse('median(age)', 1.0)

    with raises(AssertionError, match='need a column'):
        Query('mean', 1.0)

    with raises(AssertionError, match='positive'):
        Query('count', 0.0)


def test_sensitivity(patients):
    assert sensitivity(Query('count', 1.0), patients) == 1.0
    assert sensitivity(Query('sum', 1.0, 'age'), patients) == 100.0
    assert sensitivity(Query('mean', 1.0, 'systolic_bp'), patients) == pytest.approx(1.2)

    with raises(UnknownColumn):
        sensitivity(Query('sum', 1.0, 'weight'), patients)


def test_exact_answer(patients):
    assert exact_answer(Query('count', 1.0), patients) == 100.0
    assert exact_answer(Query('sum', 1.0, 'smoker'), patients) == 25.0
    assert patients.frame['systolic_bp'].max() == 170


@pytest.mark.parametrize('eps', [0.5, 1.0, 2.0])
def test_noise_scale(patients, eps):
    query = Query('count', eps)
    rng = np.random.default_rng(0)
    noise = laplace_mechanism(query, patients, rng, size=100_000) - exact_answer(query, patients)
    expected = np.sqrt(2) * sensitivity(query, patients) / eps
    assert sensitivity(query, patients) == 1.0
    assert np.std(noise) == pytest.approx(expected, rel=0.05)
    assert abs(np.mean(noise)) < 0.05 * expected


def test_large_eps(patients):
    ledger = BudgetLedger('b', 1e6)
    answer = answer_query(ledger, Query('sum', 1e6, 'smoker'), patients, seed=0)
    assert answer == pytest.approx(25.0, abs=1e-3)


def test_neighbouring_datasets(patients):
    eps = np.log(2)
    query = Query('count', eps)
    neighbour = patients.drop_row()
    draws = 1_000_000

    first = laplace_mechanism(query, patients, np.random.default_rng(1), size=draws)
    second = laplace_mechanism(query, neighbour, np.random.default_rng(2), size=draws)

    bins = np.arange(94.5, 105.5)
    counts, _ = np.histogram(first, bins)
    others, _ = np.histogram(second, bins)
    enough = (counts >= 500) & (others >= 500)
    assert enough.sum() >= 5

    # Bin counts are binomial, so log(a / b) has standard error about sqrt(1 / a + 1 / b).
    # Each bin gets five standard errors of slack.
    a, b = counts[enough], others[enough]
    slack = np.exp(5 * np.sqrt(1 / a + 1 / b))
    ratios = a / b
    assert np.all(ratios <= np.exp(eps) * slack)
    assert np.all(ratios >= np.exp(-eps) / slack)


def test_refused_query_leaves_ledger(patients):
    ledger = BudgetLedger('b', 1.0)
    answer_query(ledger, Query('count', 0.6), patients, seed=0)

    with raises(BudgetExceeded):
        answer_query(ledger, Query('mean', 0.5, 'age'), patients, seed=0)

    with raises(UnknownColumn):
        answer_query(ledger, Query('mean', 0.1, 'weight'), patients, seed=0)

    assert ledger.used_types == {'count'}
    assert ledger.remaining == pytest.approx(0.4)


def test_seeded_answers(patients):
    query = Query('sum', 0.5, 'age')
    first = answer_query(BudgetLedger('b', 1.0), query, patients, seed=5)
    second = answer_query(BudgetLedger('b', 1.0), query, patients, seed=5)
    assert first == second
