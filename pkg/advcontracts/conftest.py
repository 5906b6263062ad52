import numpy as np
import pytest
from _pytest.doctest import DoctestItem

from advcontracts.demos import make_marketplace, make_two_type, make_unbounded
from advcontracts.nonadv import solve_nonadv


@pytest.fixture(scope="session")
def two_type():
    return make_two_type()


@pytest.fixture(scope="session")
def coarse_two_type():
    return make_two_type(grid_m=101)


@pytest.fixture(scope="session")
def marketplace():
    return make_marketplace(grid_m=21)


@pytest.fixture(scope="session")
def unbounded():
    return make_unbounded()


@pytest.fixture(scope="session")
def two_type_solution(two_type):
    return solve_nonadv(two_type)


@pytest.fixture(autouse=True)
def add_model(doctest_namespace, two_type):
    doctest_namespace['model'] = two_type


@pytest.fixture(autouse=True)
def legacy_numpy_repr(request):
    # Doctests were written against the NumPy 1.x scalar repr.
    if isinstance(request.node, DoctestItem) and int(np.__version__.split('.')[0]) >= 2:
        with np.printoptions(legacy='1.25'):
            yield
    else:
        yield
