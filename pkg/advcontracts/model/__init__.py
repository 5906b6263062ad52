# flake8:noqa
from .deserialize import SCHEMA_VERSION, parse_scenario, read_scenario, write_scenario
from .functions import AdversaryCost, BenefitFunction, eval_benefit, eval_cost
from .market import MarketModel, Tolerances
from .validation import ValidationReport, Violation, check_menu, check_model, validate_model
