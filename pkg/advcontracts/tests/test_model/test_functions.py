import numpy as np
import pytest

from advcontracts.exceptions import DomainError
from advcontracts.model import AdversaryCost, BenefitFunction, eval_benefit, eval_cost


def test_saturating_exp():
    f = BenefitFunction('scaled_saturating_exp', scale=1, rate=10)
    assert f(0) == 0.0
    assert f(np.log(2) / 5) == pytest.approx(0.75)


def test_log1p_and_power():
    assert BenefitFunction('log1p', scale=2)(1) == pytest.approx(2 * np.log(2))
    assert BenefitFunction('power', scale=3, exponent=0.5)(0.25) == pytest.approx(1.5)


def test_tabulated_interpolates():
    f = BenefitFunction('tabulated', knots_eps=[0, 0.5, 1], knots_values=[0, 1, 1.5])
    values = f(np.array([0.25, 0.75]))
    assert values.tolist() == [0.5, 1.25]


def test_vector_input_keeps_shape():
    f = BenefitFunction('log1p')
    assert f(np.linspace(0, 1, 5)).shape == (5,)
    assert isinstance(f(0.5), float)


def test_domain_error():
    f = BenefitFunction('log1p')
    with pytest.raises(DomainError, match='must be in'):
        f(-0.1)

    with pytest.raises(ValueError):
        eval_cost(AdversaryCost('exp_scaled'), [0.5, 1.01])


def test_cost_families():
    assert AdversaryCost('exp_scaled', scale=6)(1) == pytest.approx(6 * (np.e - 1))
    c = AdversaryCost('tabulated', knots_eps=[0, 1], knots_values=[0, 0.01])
    assert c(0.5) == pytest.approx(0.005)


def test_missing_parameters():
    match = 'needs a rate'
    with pytest.raises(AssertionError, match=match):
        BenefitFunction('scaled_saturating_exp')

    with pytest.raises(AssertionError, match='exponent must be'):
        BenefitFunction('power', exponent=1.5)

    with pytest.raises(AssertionError, match='cover'):
        BenefitFunction('tabulated', knots_eps=[0, 0.5], knots_values=[0, 1])


def test_dict_round_trip():
    f = BenefitFunction('scaled_saturating_exp', scale=2, rate=5, type_index=2)
    assert BenefitFunction.from_dict(f.to_dict(), type_index=2) == f

    c = AdversaryCost('tabulated', knots_eps=[0, 1], knots_values=[0, 2])
    assert AdversaryCost.from_dict(c.to_dict()) == c


def test_eval_matches_call():
    f = BenefitFunction('power', scale=2, exponent=0.5)
    assert eval_benefit(f, 0.49) == f(0.49)
