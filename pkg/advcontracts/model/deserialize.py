import json

from ..exceptions import ScenarioError
from ..version import __version__
from .market import MarketModel

SCHEMA_VERSION = '0.1.0'
REQUIRED = ('q', 'rho', 'gamma', 'phi', 'benefits', 'cost')


def read_scenario(path):
    """Reads a market model from a scenario file.

    Args:
        path (str): Location of the scenario file (JSON).

    Returns:
        model (MarketModel): The market model.
    """
    try:
        with open(path, 'r') as file:
            data = json.load(file)
    except json.JSONDecodeError as error:
        raise ScenarioError('scenario is not valid JSON: %s' % error) from error

    return parse_scenario(data)


def parse_scenario(data):
    """Creates a market model from a parsed scenario document."""
    if not isinstance(data, dict): raise ScenarioError('scenario must be a JSON object')
    missing = [key for key in REQUIRED if key not in data]
    if missing: raise ScenarioError('scenario is missing: %s' % ', '.join(missing))

    version = data.get('schema_version', SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError('unsupported schema version "%s"' % version)

    try:
        model = MarketModel.from_dict(data)
    except (AssertionError, KeyError, TypeError, ValueError) as error:
        raise ScenarioError('malformed scenario: %s' % error) from error

    n = data.get('n', model.n)
    if n != model.n or len(model.q) != model.n:
        raise ScenarioError('scenario declares %s types but lists %d shares and %d benefits' % (n, len(model.q), model.n))

    return model


def write_scenario(model, path):
    """Writes a market model as a scenario file.

    Reading the file back yields a model equal to the one written.

    Args:
        model (MarketModel): The market model.
        path (str): Location of the scenario file.
    """
    data = {'schema_version': SCHEMA_VERSION, 'advcontracts_version': __version__}
    data.update(model.to_dict())

    with open(path, 'w') as file:
        json.dump(data, file, indent=2)
