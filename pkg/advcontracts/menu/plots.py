import matplotlib as mpl  # isort:skip

# Raises an import error on OSX if not included.
# https://matplotlib.org/3.1.0/faq/osx_framework.html#working-with-matplotlib-on-osx
mpl.use('agg')  # noqa

import matplotlib.pyplot as plt
import numpy as np
import seaborn as sns

sns.set_context('notebook')
sns.set_style('darkgrid')
COLOR = sns.color_palette('Set1', n_colors=100, desat=.75)


class MenuPlots:
    """Creates plots for contract menus."""

    def __init__(self, menu):
        """Initializes menu plots.

        Args:
            menu (ContractMenu) : instance of a contract menu
        """
        self._menu = menu

    def curves(self, model, curve=None, ax=None):
        """Plots the benefit curves, the adversary cost and the offered contracts.

        Args:
            model (MarketModel): The market model the menu was designed for.
            curve (CurveTable): Optional price-contract curve to overlay.
            ax (Axes): Axes to draw on.
        """
        ax = ax or plt.axes(label=id(self))
        grid = model.grid
        palette = sns.color_palette('Blues', n_colors=model.n)

        for i, values in enumerate(model.benefit_table, start=1):
            ax.plot(grid, values, color=palette[i - 1], lw=1, label='b%d' % i)

        top = model.benefit_table[-1].max()
        cost = model.cost_table
        ax.plot(grid, np.where(cost <= 2 * top, cost, np.nan), color=COLOR[0], lw=2, label='C')

        if curve is not None:
            ax.plot(curve.grid, curve.values, color=COLOR[2], lw=2, ls='--', label='P')

        ax.scatter(
            self._menu['eps'],
            self._menu['effective_price'],
            color=COLOR[1],
            zorder=3,
            label='contracts',
        )

        ax.legend(loc='upper left', facecolor='w', framealpha=.9)
        ax.set_title('Benefit Curves and Contracts')
        ax.set_xlabel('Privacy Level')
        ax.set_ylabel('Value')
        return ax

    def effective_prices(self, **kwargs):
        """Plots the effective price of each type's contract split into price and expected fine."""
        menu = self._menu
        ax = kwargs.pop('ax', None) or plt.axes(label=id(self))
        types = menu.index.astype('str')
        expected_fine = menu['effective_price'] - menu['price']

        ax.bar(types, menu['price'], color=COLOR[1], label='price', **kwargs)
        ax.bar(types, expected_fine, bottom=menu['price'], color=COLOR[0], label='expected fine', **kwargs)
        ax.legend(loc='upper left', facecolor='w', framealpha=.9)
        ax.set_title('Effective Prices')
        ax.set_xlabel('Type')
        ax.set_ylabel('Price')
        return ax


def plot_sweep(sweep, value='poadv', ax=None, **kwargs):
    """Plots a sweep table as a heatmap over the attack probability and adversary fraction.

    Args:
        sweep (DataFrame): Output of a sweep, one row per (gamma, rho).
        value (str): Column to plot.
        ax (Axes): Axes to draw on.
    """
    table = sweep.pivot(index='gamma', columns='rho', values=value)
    table = table.replace(np.inf, np.nan).sort_index(ascending=False)
    ax = sns.heatmap(table, ax=ax, cmap='rocket_r', annot=True, fmt='.2f', **kwargs)
    ax.set_title('Price of Adversary')
    ax.set_xlabel('Adversary Fraction')
    ax.set_ylabel('Attack Probability')
    return ax
