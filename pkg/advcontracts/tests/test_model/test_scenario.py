import json
import os
import shutil

import pytest

from advcontracts.exceptions import ScenarioError
from advcontracts.model import Tolerances, parse_scenario, read_scenario, write_scenario


@pytest.fixture
def path():
    pwd = os.path.dirname(__file__)
    path = os.path.join(pwd, '.cache')
    os.makedirs(path, exist_ok=True)
    yield path
    shutil.rmtree(path)


def test_round_trip(path, marketplace):
    file = os.path.join(path, 'scenario.json')
    write_scenario(marketplace, file)
    assert read_scenario(file) == marketplace


def test_to_json(path, unbounded):
    file = os.path.join(path, 'unbounded.json')
    unbounded.to_json(file)

    with open(file) as f:
        data = json.load(f)

    assert data['schema_version'] == '0.1.0'
    assert data['cost'] == {'family': 'exp_scaled', 'scale': 24.0}
    assert read_scenario(file) == unbounded


def test_tolerances_default(two_type):
    data = two_type.to_dict()
    del data['tolerances']
    assert parse_scenario(data).tolerances == Tolerances()


def test_missing_keys(two_type):
    data = two_type.to_dict()
    del data['cost'], data['phi']
    with pytest.raises(ScenarioError, match='missing: phi, cost'):
        parse_scenario(data)


def test_schema_version(two_type):
    data = dict(two_type.to_dict(), schema_version='9.0.0')
    with pytest.raises(ScenarioError, match='unsupported schema version'):
        parse_scenario(data)


def test_type_count(two_type):
    data = dict(two_type.to_dict(), n=3)
    with pytest.raises(ScenarioError, match='declares 3 types'):
        parse_scenario(data)


def test_malformed(two_type):
    data = two_type.to_dict()
    data['benefits'][0] = {'family': 'unknown'}
    with pytest.raises(ScenarioError, match='malformed scenario'):
        parse_scenario(data)

    with pytest.raises(ScenarioError, match='JSON object'):
        parse_scenario([1, 2])


def test_invalid_json(path):
    file = os.path.join(path, 'broken.json')
    with open(file, 'w') as f:
        f.write('{"q": [0.5,')

    with pytest.raises(ScenarioError, match='not valid JSON'):
        read_scenario(file)


def test_restrict(marketplace):
    model = marketplace.restrict(3)
    assert model.n == 3
    assert sum(model.q) == pytest.approx(1)
    assert model.benefits == marketplace.benefits[:3]
