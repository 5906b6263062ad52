import json
import os
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..version import __version__
from .description import describe_menu
from .plots import MenuPlots

SCHEMA_VERSION = '0.1.0'
COLUMNS = ['eps', 'price', 'fine', 'effective_price']


@dataclass(frozen=True)
class Contract:
    """A bundle offer: price, privacy level and post-hoc fine.

    Examples:
        >>> c = Contract(price=0.0375, eps=0.5, fine=7.125)
        >>> round(c.effective_price(gamma=0.1), 6)
        0.75
    """
    price: float
    eps: float
    fine: float = 0.0

    def effective_price(self, gamma):
        """Expected payment of an honest buyer, price + gamma * fine."""
        return self.price + gamma * self.fine

    def utility(self, benefit, gamma):
        """Expected utility b(eps) - p - gamma s of an honest buyer with benefit b."""
        return benefit(self.eps) - self.effective_price(gamma)

    def satisfies_sr(self, phi, gamma, tol=0.0):
        """Whether the price covers the steady-revenue share of the expected payment."""
        return self.price >= (1 - phi) * self.effective_price(gamma) - tol


class ContractMenu(pd.DataFrame):
    """The data frame that holds one contract per honest type.

    The index is the type (1-based) and the columns are the privacy level, price,
    fine and effective price of the contract offered to the type.
    """

    def __init__(self, data=None, gamma=None, solve_settings=None, *args, **kwargs):
        super().__init__(data=data, *args, **kwargs)
        self.gamma = gamma
        self.solve_settings = solve_settings or {}
        self.plot = MenuPlots(self)

    @classmethod
    def from_arrays(cls, eps, price, fine, gamma, solve_settings=None):
        """Creates a menu from per-type arrays.

        Args:
            eps (array): Privacy levels.
            price (array): Prices.
            fine (array): Fines.
            gamma (float): Attack probability used for the effective prices.
            solve_settings (dict): Settings of the solver that made the menu.

        Returns:
            menu (ContractMenu): The contract menu.

        Examples:
            >>> menu = ContractMenu.from_arrays([0.2, 0.8], [0.5, 1.0], [0, 2.5], gamma=0.2)
            >>> menu['effective_price'].tolist()
            [0.5, 1.5]
        """
        eps = np.asarray(eps, dtype=float)
        price = np.asarray(price, dtype=float)
        fine = np.asarray(fine, dtype=float)
        info = 'menu arrays must have equal lengths'
        assert eps.shape == price.shape == fine.shape, info

        index = pd.RangeIndex(1, len(eps) + 1, name='type_index')
        data = {'eps': eps, 'price': price, 'fine': fine, 'effective_price': price + gamma * fine}
        data = pd.DataFrame(data, index=index, columns=COLUMNS)
        return cls(data=data, gamma=float(gamma), solve_settings=solve_settings)

    @classmethod
    def from_contracts(cls, contracts, gamma, solve_settings=None):
        """Creates a menu from a list of contracts, one per type."""
        eps = [contract.eps for contract in contracts]
        price = [contract.price for contract in contracts]
        fine = [contract.fine for contract in contracts]
        return cls.from_arrays(eps, price, fine, gamma, solve_settings)

    @property
    def contracts(self):
        """Returns the contracts as a list."""
        rows = self[['price', 'eps', 'fine']].itertuples(index=False)
        return [Contract(float(price), float(eps), float(fine)) for price, eps, fine in rows]

    def contract(self, i):
        """Returns the contract offered to type i (1-based)."""
        row = self.loc[i]
        return Contract(float(row['price']), float(row['eps']), float(row['fine']))

    @property
    def n(self):
        return len(self)

    @property
    def settings(self):
        """Returns metadata about the menu."""
        return {
            'advcontracts_version': __version__,
            'schema_version': SCHEMA_VERSION,
            'contract_menu': {
                'gamma': self.gamma,
                'solve_settings': self.solve_settings,
            }
        }

    def describe(self):
        """Prints out the contracts with the settings used to make them."""
        if not self.empty: describe_menu(self)

    def copy(self, deep=True):
        menu = super().copy(deep=deep)
        menu.gamma = self.gamma
        menu.solve_settings = dict(self.solve_settings)
        return menu

    def equals(self, other, **kwargs):
        """Determines if two menus hold the same contracts and settings.

        Args:
            other (ContractMenu) : Other menu for comparison.
            **kwargs: Keyword arguments to pass to underlying pandas.DataFrame.equals method

        Returns:
            bool : Whether the menus are the same.
        """
        is_equal = super().equals(other, **kwargs)
        is_equal &= self.settings == getattr(other, 'settings', None)
        return is_equal

    def _save_settings(self, path):
        settings = self.settings
        file = os.path.join(path, 'settings.json')
        with open(file, 'w') as file:
            json.dump(settings, file, indent=2, sort_keys=True)

    def to_csv(self, path, save_settings=True, **kwargs):
        """Write the menu in csv format to disk.

        Args:
            path (str) : Location on disk to write to (will be created as a directory).
            save_settings (bool) : Whether to save the settings used to make the menu.
            **kwargs: Keyword arguments to pass to underlying pandas.DataFrame.to_csv method
        """
        os.makedirs(path, exist_ok=True)
        file = os.path.join(path, 'data.csv')
        super().to_csv(file, index=True, **kwargs)

        if save_settings:
            self._save_settings(path)

    # ----------------------------------------
    # Subclassing Pandas Data Frame
    # ----------------------------------------

    _metadata = ['gamma', 'solve_settings']

    @property
    def _constructor(self):
        return ContractMenu
