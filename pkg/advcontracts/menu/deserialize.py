import json
import os

import pandas as pd

from .object import ContractMenu


def read_config(path):
    """Reads the settings file of a menu from disk."""
    file = os.path.join(path, 'settings.json')
    assert os.path.exists(file), "settings not found: '%s'" % file

    with open(file, 'r') as file:
        return json.load(file)


def read_data(path):
    """Reads the contracts of a menu from disk."""
    file = os.path.join(path, 'data.csv')
    assert os.path.exists(file), "data not found: '%s'" % file
    return pd.read_csv(file, index_col='type_index', float_precision='round_trip')


def read_menu(path, load_settings=True):
    """Reads a contract menu from disk.

    Args:
        path (str): Directory where the menu is stored.
        load_settings (bool): Whether to restore the attack probability and solver settings.

    Returns:
        menu (ContractMenu): Deserialized contract menu.
    """
    kwargs = {}
    data = read_data(path).astype('float64')

    if load_settings:
        config = read_config(path)
        kwargs.update(config['contract_menu'])

    return ContractMenu(data=data, **kwargs)
