import os
import shutil

import pandas as pd
import pytest
from pytest import raises

from advcontracts.dp import Dataset, read_dataset
from advcontracts.dp.dataset import default_bounds_path
from advcontracts.exceptions import UnknownColumn


@pytest.fixture
def path():
    pwd = os.path.dirname(__file__)
    path = os.path.join(pwd, '.cache')
    os.makedirs(path, exist_ok=True)
    yield path
    shutil.rmtree(path)


def test_bounds():
    frame = pd.DataFrame({'age': [30, 40], 'bp': [120, 130]})

    with raises(AssertionError, match='missing bounds for columns: bp'):
        Dataset(frame, {'age': (0, 100)})

    with raises(AssertionError, match='within'):
        Dataset(frame, {'age': (0, 35), 'bp': (80, 200)})

    with raises(AssertionError, match='must not be empty'):
        Dataset(frame.iloc[:0], {'age': (0, 100), 'bp': (80, 200)})


def test_column():
    ds = Dataset(pd.DataFrame({'age': [30, 40]}), {'age': (0, 100)})
    values, bounds = ds.column('age')
    assert values.tolist() == [30.0, 40.0]
    assert bounds == (0.0, 100.0)

    with raises(UnknownColumn):
        ds.column('weight')


def test_drop_row():
    ds = Dataset(pd.DataFrame({'age': [30, 40, 50]}), {'age': (0, 100)})
    neighbour = ds.drop_row()
    assert neighbour.size == 2
    assert neighbour.frame['age'].tolist() == [30.0, 40.0]
    assert neighbour.bounds == ds.bounds


def test_read_dataset(path):
    data = os.path.join(path, 'records.csv')
    with open(data, 'w') as file:
        file.write('age;bp\n30;120\n40;130\n')

    with open(default_bounds_path(data), 'w') as file:
        file.write('{"age": [0, 100], "bp": [80, 200]}')

    assert default_bounds_path(data).endswith('records_bounds.json')
    ds = read_dataset(data)
    assert ds.columns == ['age', 'bp']
    assert ds.size == 2
