# flake8:noqa
from . import demos, dp, experiments
from .adv import evaluate_menu, price_of_adversary, realized_revenue, solve_adv_exact
from .approx import approx_contracts, classify_cost, make_slack_contract, poadv_bound
from .menu import ContractMenu, read_menu
from .model import MarketModel, read_scenario, validate_model, write_scenario
from .nonadv import price_contract_curve, solve_nonadv
from .sim import SimConfig, simulate
from .version import __version__
