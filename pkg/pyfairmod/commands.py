"""Command functions behind the pyfairmod command line

Every command returns a pair (out, err): the produced document on success or an error message,
and the process exit code. Configuration, map and oracle size errors exit with 2, anything else
with 1.

Functions
---------
parse_seeds()
    Parses a seed list such as 0..19 or 1,4,7
parse_toggles()
    Parses the toggle cells of a batch run
run_cell()
    Runs one seed of one toggle cell
cmd_simulate()
    Runs one scenario and writes its report
cmd_batch()
    Runs seeds times toggle cells and writes per-seed and aggregate rows
cmd_gen_map()
    Writes a synthetic grid map
cmd_oracle_compare()
    Compares the auction with the centralized oracle on the same scenario
"""

import json
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

import pyfairmod
import pyfairmod.errors as ERRORS
import pyfairmod.logger as LOGGER
import pyfairmod.network as NETWORK
import pyfairmod.sim as SIM
import pyfairmod.config_manager as CONFIG


EXIT_OK         = 0
EXIT_INTERNAL   = 1
EXIT_USAGE      = 2

USAGE_ERRORS = (ERRORS.ConfigError, ERRORS.MapError, ERRORS.OracleCapError, ERRORS.FormulaError,
                ERRORS.RequestGenerationError, ERRORS.ReportSchemaError)

TOGGLE_CELLS = {
    'none':                 (False, False),
    'weight_correction':    (True, False),
    'rebalancing':          (False, True),
    'both':                 (True, True),
}


def parse_seeds(text):
    """Parses a seed list

    Parameters
    ----------
    text : str
        Inclusive range a..b, comma separated seeds, or a single seed

    Returns
    -------
    seeds : list of int
        Seeds in the given order
    """

    try:
        if '..' in text:
            first, last = text.split('..')
            seeds = list(range(int(first), int(last) + 1))
        else:
            seeds = [int(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise ERRORS.ConfigError('Invalid seed list {}'.format(text))
    if not seeds:
        raise ERRORS.ConfigError('Seed list {} is empty'.format(text))
    return seeds


def parse_toggles(text):
    """Parses the toggle cells of a batch run, all meaning every combination
    """

    if text == 'all':
        return list(TOGGLE_CELLS)
    cells = [item.strip() for item in text.split(',') if item.strip()]
    unknown = [cell for cell in cells if cell not in TOGGLE_CELLS]
    if unknown or not cells:
        raise ERRORS.ConfigError('Unknown toggle cells {}, expected some of {}'.format(unknown, ', '.join(TOGGLE_CELLS)))
    return cells


def _base_report(command, config, start):
    return {
        'command':  command,
        'version':  pyfairmod.__version__,
        'scenario': config.to_dict(),
        'duration': float(time.perf_counter() - start),
    }


def _write_lines(path, records):
    with open(path, 'w') as fp:
        for record in records:
            fp.write(json.dumps(record, sort_keys=True) + '\n')


def _run_command(name, body):
    LOGGER.write('Running command {}'.format(name))
    try:
        out = body()
        LOGGER.write('Command {} finished'.format(name))
        return out, EXIT_OK
    except USAGE_ERRORS as e:
        LOGGER.write('Command {} failed: {}'.format(name, e))
        return '{}: {}'.format(type(e).__name__, e), EXIT_USAGE
    except Exception as e:
        LOGGER.write('Command {} crashed: {}: {}'.format(name, type(e).__name__, e))
        return 'Internal error in {}: {}: {}'.format(name, type(e).__name__, e), EXIT_INTERNAL


def cmd_simulate(config_path, out_path, seed=None, overrides=None, table_path=None, events_path=None, trace_path=None):
    """Runs one scenario and writes its report

    Parameters
    ----------
    config_path : str
        Scenario file
    out_path : str
        Report file
    seed : int
        Seed override
    overrides : dict
        Further scenario field overrides
    table_path, events_path, trace_path : str
        Optional metrics table, event log and auction message trace outputs

    Returns
    -------
    out : dict or str
        Report, or error message
    err : int
        Exit code
    """

    def body():
        start = time.perf_counter()
        config = CONFIG.load_scenario(config_path, dict(overrides or {}, seed=seed, record_trace=True if trace_path else None))
        world = SIM.simulate(config)
        metrics = SIM.compute_metrics(world).to_dict()
        report = _base_report('simulate', config, start)
        report['seed'] = config.seed
        report['metrics'] = metrics
        CONFIG.write_report(out_path, report)
        if table_path is not None:
            CONFIG.write_table(table_path, [dict(seed=config.seed, **metrics)])
        if events_path is not None:
            SIM.export_event_log(world, events_path)
        if trace_path is not None:
            _write_lines(trace_path, world.message_trace)
        return report

    return _run_command('simulate', body)


def run_cell(document, cell, seed):
    """Runs one seed of one toggle cell

    Parameters
    ----------
    document : dict
        Scenario fields
    cell : str
        Toggle cell name
    seed : int
        Seed

    Returns
    -------
    row : dict
        Cell, seed, toggles and either metrics or the error message
    """

    weight_correction, rebalancing = TOGGLE_CELLS[cell]
    row = {'cell': cell, 'seed': seed, 'weight_correction': weight_correction, 'rebalancing': rebalancing,
           'metrics': None, 'error': None}
    try:
        config = SIM.ScenarioConfig.from_dict(CONFIG.apply_overrides(
            document, {'seed': seed, 'weight_correction': weight_correction, 'rebalancing': rebalancing}))
        row['metrics'] = SIM.run_simulation(config).to_dict()
    except Exception as e:
        row['error'] = '{}: {}'.format(type(e).__name__, e)
    return row


def _aggregate(cell, rows):
    weight_correction, rebalancing = TOGGLE_CELLS[cell]
    good = [row['metrics'] for row in rows if row['error'] is None]
    aggregate = {'cell': cell, 'weight_correction': weight_correction, 'rebalancing': rebalancing,
                 'seeds': len(good), 'failed': len(rows) - len(good)}
    fields = [('mean_min_utility', 'min_utility'), ('mean_utility_std', 'utility_std'),
              ('mean_avg_utility', 'avg_utility'), ('mean_serving_rate', 'serving_rate')]
    for name, source in fields:
        aggregate[name] = float(np.mean([metrics[source] for metrics in good])) if good else None
    return aggregate


def cmd_batch(config_path, seeds, out_path, toggles='all', jobs=1, overrides=None, table_path=None):
    """Runs every seed in every toggle cell

    Failed cells are reported in their row and the run continues.

    Parameters
    ----------
    config_path : str
        Scenario file
    seeds : list of int
        Seeds, at least one
    out_path : str
        Report file
    toggles : str
        all or comma separated cells among none, weight_correction, rebalancing, both
    jobs : int
        Number of worker processes

    Returns
    -------
    out : dict or str
        Report with one row per cell and seed plus one aggregate per cell, or error message
    err : int
        Exit code
    """

    def body():
        start = time.perf_counter()
        if not seeds:
            raise ERRORS.ConfigError('Batch runs need at least one seed')
        if jobs < 1:
            raise ERRORS.ConfigError('jobs must be positive, got {}'.format(jobs))
        cells = parse_toggles(toggles)
        document = CONFIG.apply_overrides(CONFIG.read_config(config_path), overrides or {})
        config = SIM.ScenarioConfig.from_dict(document)
        tasks = [(cell, seed) for cell in cells for seed in seeds]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as executor:
                rows = list(executor.map(run_cell, [document] * len(tasks), *zip(*tasks)))
        else:
            rows = [run_cell(document, cell, seed) for cell, seed in tasks]
        for row in rows:
            if row['error'] is not None:
                LOGGER.write('Batch cell {} seed {} failed: {}'.format(row['cell'], row['seed'], row['error']))
        report = _base_report('batch', config, start)
        report['seeds'] = list(seeds)
        report['rows'] = rows
        report['aggregates'] = [_aggregate(cell, [row for row in rows if row['cell'] == cell]) for cell in cells]
        CONFIG.write_report(out_path, report)
        if table_path is not None:
            CONFIG.write_table(table_path, rows + report['aggregates'])
        return report

    return _run_command('batch', body)


def cmd_gen_map(kind, size, out_path, cols=None, min_weight=1, max_weight=1, peak_mass=0.5, spread=2, seed=0):
    """Writes a synthetic bidirectional grid map with a probability map

    Parameters
    ----------
    kind : str
        uniform, center, corner or two_peaks
    size : int
        Grid rows, and columns unless cols is given, at least 2
    out_path : str
        Map file

    Returns
    -------
    out : dict or str
        Map document, or error message
    err : int
        Exit code
    """

    def body():
        if kind not in NETWORK.PROBABILITY_MAP_KINDS:
            raise ERRORS.ConfigError('Unknown map kind {}, expected one of {}'.format(kind, ', '.join(NETWORK.PROBABILITY_MAP_KINDS)))
        if size < 2 or (cols is not None and cols < 2):
            raise ERRORS.ConfigError('Grid side must be at least 2')
        network = NETWORK.make_grid_network(size, cols or size, min_weight, max_weight, seed)
        network = network.copy_with(arrival_prob=NETWORK.make_probability_map(network, kind, peak_mass, spread))
        document = NETWORK.network_to_document(network)
        CONFIG.write_network_document(out_path, document)
        return document

    return _run_command('gen-map', body)


def _compare_seed(document, seed, method):
    settings = {'seed': seed, 'weight_correction': False, 'oracle_method': method, 'price_init': 'zero'}
    auction = SIM.ScenarioConfig.from_dict(CONFIG.apply_overrides(document, dict(settings, assignment='auction', record_oracle_gap=True)))
    oracle = SIM.ScenarioConfig.from_dict(CONFIG.apply_overrides(document, dict(settings, assignment='oracle')))
    auction_world = SIM.simulate(auction)
    oracle_world = SIM.simulate(oracle)
    gaps = auction_world.oracle_gaps
    return {
        'seed':             seed,
        'auction':          SIM.compute_metrics(auction_world).to_dict(),
        'oracle':           SIM.compute_metrics(oracle_world).to_dict(),
        'cycle_gaps':       gaps,
        'max_gap':          float(max([gap['gap'] for gap in gaps], default=0.0)),
        'bound_violations': sum(1 for gap in gaps if gap['gap'] > gap['bound'] + 1e-9),
    }


def cmd_oracle_compare(config_path, seeds, out_path, method='exhaustive', overrides=None, table_path=None):
    """Runs each seed once with the auction and once with the oracle

    The auction run uses no weight correction and zero starting prices, and records for every
    auction stage the gap between the oracle optimum and the auction total on the same utility
    matrix.

    Parameters
    ----------
    config_path : str
        Scenario file
    seeds : list of int
        Seeds
    out_path : str
        Report file
    method : str
        Oracle method, exhaustive or hungarian

    Returns
    -------
    out : dict or str
        Comparison report, or error message
    err : int
        Exit code
    """

    def body():
        start = time.perf_counter()
        if not seeds:
            raise ERRORS.ConfigError('Oracle comparison needs at least one seed')
        document = CONFIG.apply_overrides(CONFIG.read_config(config_path), overrides or {})
        config = SIM.ScenarioConfig.from_dict(CONFIG.apply_overrides(document, {'oracle_method': method}))
        rows = [_compare_seed(document, seed, method) for seed in seeds]
        auction_rate = float(np.mean([row['auction']['serving_rate'] for row in rows]))
        oracle_rate = float(np.mean([row['oracle']['serving_rate'] for row in rows]))
        auction_utility = float(np.mean([row['auction']['avg_utility'] for row in rows]))
        oracle_utility = float(np.mean([row['oracle']['avg_utility'] for row in rows]))
        report = _base_report('oracle-compare', config, start)
        report['seeds'] = list(seeds)
        report['method'] = method
        report['rows'] = rows
        report['summary'] = {
            'auction_serving_rate':     auction_rate,
            'oracle_serving_rate':      oracle_rate,
            'serving_rate_difference':  auction_rate - oracle_rate,
            'auction_avg_utility':      auction_utility,
            'oracle_avg_utility':       oracle_utility,
            'avg_utility_difference':   auction_utility - oracle_utility,
            'max_cycle_gap':            float(max(row['max_gap'] for row in rows)),
            'bound_violations':         int(sum(row['bound_violations'] for row in rows)),
        }
        CONFIG.write_report(out_path, report)
        if table_path is not None:
            CONFIG.write_table(table_path, [{'seed': row['seed'], 'auction': row['auction'], 'oracle': row['oracle'],
                                             'max_gap': row['max_gap']} for row in rows])
        return report

    return _run_command('oracle-compare', body)
