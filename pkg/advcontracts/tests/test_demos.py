import numpy as np

from advcontracts import demos


def test_bundled_scenarios():
    assert demos.load_marketplace() == demos.make_marketplace()
    assert demos.load_two_type() == demos.make_two_type()
    assert demos.load_unbounded() == demos.make_unbounded()
    assert demos.load_low_cost() == demos.make_low_cost()
    assert demos.load_high_cost() == demos.make_high_cost()


def test_marketplace_benefits():
    model = demos.make_marketplace()
    assert model.n == 10
    assert model.benefit(3, 1.0) == 3 * -np.expm1(-10 / 3)


def test_unbounded_cost():
    model = demos.make_unbounded()
    assert model.cost.scale == 24.0
    assert model.q == (0.4, 0.6)


def test_patients():
    ds = demos.load_patients()
    assert ds.size == 100
    assert ds.columns == ['age', 'systolic_bp', 'smoker']
    assert ds.bounds['age'] == (0.0, 100.0)
