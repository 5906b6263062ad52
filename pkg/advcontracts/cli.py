import argparse
import json
import logging
import os
import sys

import numpy as np
import pandas as pd

from .adv import NODE_CAP, SOLVERS, price_of_adversary, solve_adv_exact
from .approx import approx_contracts, poadv_bound
from .dp import BudgetLedger, Query, answer_query, read_dataset
from .exceptions import (
    AdvContractsError,
    BudgetExceeded,
    DPError,
    InvalidModelError,
    ScenarioError
)
from .experiments import SweepSpec, bench, sweep
from .model import SCHEMA_VERSION, read_scenario, validate_model
from .nonadv import solve_nonadv
from .sim import SimConfig, simulate
from .version import __version__

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2
EXIT_BUDGET = 3

FLOAT_FORMAT = '%.12g'
LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def _floats(text):
    try:
        return [float(value) for value in text.split(',') if value.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('expected comma-separated numbers, got %r' % text)


def _ints(text):
    try:
        return [int(value) for value in text.split(',') if value.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('expected comma-separated integers, got %r' % text)


def _model_args(parser, out=True):
    parser.add_argument('--scenario', required=True, help='scenario file (JSON)')
    parser.add_argument('--grid-m', type=int, help='override the number of grid points')
    if out: parser.add_argument('--out', help='directory for the CSV results and settings.json')


def _solver_args(parser, default):
    parser.add_argument('--solver', choices=SOLVERS, default=default)
    parser.add_argument('--node-cap', type=int, default=NODE_CAP, help='node cap of the exact search')


def make_parser():
    parser = argparse.ArgumentParser(prog='advcontracts', description='Contract design for data marketplaces with adversarial buyers.')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='log progress (-v) or details (-vv) to stderr')
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    command = commands.add_parser('validate', help='check the modelling assumptions of a scenario')
    _model_args(command)

    command = commands.add_parser('solve-nonadv', help='optimal menu without adversaries')
    _model_args(command)
    command.add_argument('--refine', action='store_true', help='refine privacy levels between grid points')

    command = commands.add_parser('solve-adv', help='optimal menu with adversaries')
    _model_args(command)
    command.add_argument('--node-cap', type=int, default=NODE_CAP, help='node cap of the exact search')

    command = commands.add_parser('approx', help='approximate adversarial menu')
    _model_args(command)

    command = commands.add_parser('poadv', help='price of adversary of a menu')
    _model_args(command)
    _solver_args(command, 'exact')

    command = commands.add_parser('sweep', help='price of adversary over attack probabilities and adversary fractions')
    _model_args(command)
    _solver_args(command, 'nonadv-menu')
    command.add_argument('--gamma-list', type=_floats, required=True)
    command.add_argument('--rho-list', type=_floats, required=True)

    command = commands.add_parser('simulate', help='simulate buyers facing a menu')
    _model_args(command)
    _solver_args(command, 'exact')
    command.add_argument('--samples', type=int, default=100_000)
    command.add_argument('--seed', type=int, help='defaults to the rng_seed of the scenario')

    command = commands.add_parser('bench', help='solver wall times by number of types')
    _model_args(command)
    command.add_argument('--sizes', type=_ints, help='numbers of types, defaults to 2..n')
    command.add_argument('--repeats', type=int, default=3)
    command.add_argument('--node-cap', type=int, default=NODE_CAP)
    command.add_argument('--prune', action='store_true', help='let the exact search prune by its bound')

    command = commands.add_parser('dp-serve', help='answer the queries of a bundle with Laplace noise')
    command.add_argument('--dataset', required=True, help='records with a header row')
    command.add_argument('--bounds', help='bounds sidecar, defaults to <dataset>_bounds.json')
    command.add_argument('--queries', required=True, help='JSON list of {"query": ..., "eps": ...}')
    command.add_argument('--eps', type=float, help='purchased privacy level')
    command.add_argument('--contract', type=int, help='type whose contract in the non-adversarial menu was bought')
    command.add_argument('--scenario', help='scenario the contract is taken from')
    command.add_argument('--grid-m', type=int)
    command.add_argument('--buyer-id', default='buyer')
    command.add_argument('--journal', help='append-only ledger journal, replayed when it exists')
    command.add_argument('--seed', type=int, default=0)
    command.add_argument('--out')
    return parser


def _load_model(args):
    model = read_scenario(args.scenario)
    if args.grid_m: model = model.replace(grid_m=args.grid_m)
    return model


def _settings(args):
    flags = {key: value for key, value in sorted(vars(args).items()) if key not in ('command', 'verbose')}
    return {
        'advcontracts_version': __version__,
        'schema_version': SCHEMA_VERSION,
        'command': args.command,
        'flags': flags,
    }


def _emit(args, tables, extra=None):
    """Writes the first table to stdout, or every table and the settings to the output directory."""
    if not args.out:
        name, frame = next(iter(tables.items()))
        sys.stdout.write(frame.to_csv(index=False, float_format=FLOAT_FORMAT))
        return

    os.makedirs(args.out, exist_ok=True)
    for name, frame in tables.items():
        frame.to_csv(os.path.join(args.out, name + '.csv'), index=False, float_format=FLOAT_FORMAT)

    settings = _settings(args)
    if extra: settings.update(extra)
    with open(os.path.join(args.out, 'settings.json'), 'w') as file:
        json.dump(settings, file, indent=2, sort_keys=True, default=float)


def _row(values):
    return pd.DataFrame([values])


def run_validate(args):
    report = validate_model(_load_model(args))
    _emit(args, {'violations': report.to_frame()})
    if report.is_valid: return EXIT_OK

    logger.warning('%d violations: %s', len(report), ', '.join(sorted(report.invariants)))
    return EXIT_INVALID


def run_solve_nonadv(args):
    model = _load_model(args)
    solution = solve_nonadv(model, refine=args.refine)
    tables = {'menu': solution.to_frame(), 'curve': solution.curve.to_frame()}
    _emit(args, tables, {'solve_settings': solution.menu.solve_settings})
    return EXIT_OK


def run_solve_adv(args):
    model = _load_model(args)
    solution = solve_adv_exact(model, node_cap=args.node_cap)
    _emit(args, {'menu': solution.to_frame(), 'summary': _row(solution.summary())})
    return EXIT_BUDGET if solution.budget_exceeded else EXIT_OK


def run_approx(args):
    model = _load_model(args)
    nonadv = solve_nonadv(model)
    outcome = approx_contracts(model, nonadv)
    summary = outcome.summary()

    if outcome.is_solve_adv:
        logger.info('no approximate menu exists; solve the adversarial problem exactly')
        summary.update({'bound': np.nan, 'poadv': np.nan})
    else:
        summary['bound'] = poadv_bound(outcome, outcome.cost_class, model)
        summary['poadv'] = price_of_adversary(model, menu=outcome.menu).value

    _emit(args, {'assignment': outcome.to_frame(), 'summary': _row(summary)})
    return EXIT_OK


def run_poadv(args):
    model = _load_model(args)
    result = price_of_adversary(model, solver=args.solver, node_cap=args.node_cap)
    _emit(args, {'poadv': _row(result.to_dict())})
    return EXIT_BUDGET if result.budget_exceeded else EXIT_OK


def run_sweep(args):
    model = _load_model(args)
    spec = SweepSpec(args.gamma_list, args.rho_list, args.solver)
    table = sweep(model, spec, node_cap=args.node_cap, verbose=False)
    _emit(args, {'sweep': table})
    return EXIT_BUDGET if table['budget_exceeded'].any() else EXIT_OK


def _menu_for(model, solver, node_cap):
    if solver == 'nonadv-menu': return solve_nonadv(model).menu, False
    if solver == 'approx':
        outcome = approx_contracts(model)
        if not outcome.is_solve_adv: return outcome.menu, False

    solution = solve_adv_exact(model, node_cap=node_cap)
    return solution.menu, solution.budget_exceeded


def run_simulate(args):
    model = _load_model(args)
    menu, exceeded = _menu_for(model, args.solver, args.node_cap)
    seed = model.rng_seed if args.seed is None else args.seed
    report = simulate(SimConfig(menu, model, args.samples, seed), verbose=False)

    summary = {
        'samples': report.samples,
        'empirical_revenue': report.empirical_revenue,
        'std_error': report.std_error,
        'analytical_revenue': report.analytical_revenue,
        'adversary_choice': report.adversary_choice_mode,
    }

    histogram = report.choice_histogram.reset_index()
    histogram.columns = [str(column) for column in histogram.columns]
    _emit(args, {'summary': _row(summary), 'types': report.to_frame(), 'choices': histogram})
    return EXIT_BUDGET if exceeded else EXIT_OK


def run_bench(args):
    model = _load_model(args)
    sizes = args.sizes or list(range(2, model.n + 1))
    table = bench(model, sizes, repeats=args.repeats, node_cap=args.node_cap, prune=args.prune, verbose=False)
    _emit(args, {'bench': table})
    return EXIT_OK


def _purchased_eps(args):
    if (args.eps is None) == (args.contract is None):
        raise ScenarioError('give exactly one of --eps and --contract')

    if args.eps is not None: return args.eps
    if not args.scenario: raise ScenarioError('--contract needs --scenario')
    menu = solve_nonadv(_load_model(args)).menu
    return menu.contract(args.contract).eps


def run_dp_serve(args):
    if args.journal and os.path.exists(args.journal):
        ledger = BudgetLedger.replay(args.journal)
        logger.info('replayed ledger of %s with %g left', ledger.buyer_id, ledger.remaining)
    else:
        ledger = BudgetLedger(args.buyer_id, _purchased_eps(args), journal=args.journal)

    dataset = read_dataset(args.dataset, args.bounds)
    with open(args.queries, 'r') as file:
        queries = [Query.from_dict(item) for item in json.load(file)]

    seeds = np.random.SeedSequence(args.seed).spawn(len(queries))
    rows, refused = [], False

    for query, seed in zip(queries, seeds):
        row = {'query': query.key, 'eps': query.eps, 'answer': np.nan, 'status': 'ok'}
        try:
            row['answer'] = answer_query(ledger, query, dataset, np.random.default_rng(seed))
        except DPError as error:
            row['status'] = type(error).__name__
            refused |= isinstance(error, BudgetExceeded)
            logger.warning('refused %s: %s', query.key, error)

        rows.append(row)

    _emit(args, {'answers': pd.DataFrame(rows, columns=['query', 'eps', 'answer', 'status'])})
    return EXIT_BUDGET if refused else EXIT_OK


COMMANDS = {
    'validate': run_validate,
    'solve-nonadv': run_solve_nonadv,
    'solve-adv': run_solve_adv,
    'approx': run_approx,
    'poadv': run_poadv,
    'sweep': run_sweep,
    'simulate': run_simulate,
    'bench': run_bench,
    'dp-serve': run_dp_serve,
}


def main(argv=None):
    """Runs a command and returns its exit code.

    Exit codes are 0 on success, 1 for malformed input, 2 when the scenario breaks the
    modelling assumptions and 3 when a budget is exhausted.
    """
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as error:
        return EXIT_ERROR if error.code else EXIT_OK

    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)

    try:
        return COMMANDS[args.command](args)
    except InvalidModelError as error:
        logger.error('%s', error)
        return EXIT_INVALID
    except (AdvContractsError, OSError, AssertionError) as error:
        logger.error('%s', error)
        return EXIT_ERROR
