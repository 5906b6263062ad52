# flake8:noqa
from .deserialize import read_menu
from .object import Contract, ContractMenu
from .plots import plot_sweep
