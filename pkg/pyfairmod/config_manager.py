"""Reading, validating and writing of scenario, map and report documents

All documents are JSON files. Relative network paths inside a scenario file are resolved
against the directory of the scenario file.

Functions
---------
read_config()
    Reads a scenario document
apply_overrides()
    Applies command line overrides to a scenario document
load_scenario()
    Reads a scenario file into a ScenarioConfig
read_network_document()
    Reads a map document
write_network_document()
    Writes a map document
validate_report()
    Checks a report against REPORT_SCHEMA
write_report()
    Validates and writes a report document
write_table()
    Writes report rows as a comma separated table
"""

import os
import csv
import json

import pyfairmod.errors as ERRORS
import pyfairmod.logger as LOGGER


METRICS_FIELDS = {
    'utilities':            list,
    'min_utility':          float,
    'utility_std':          float,
    'avg_utility':          float,
    'max_utility':          float,
    'total_travel_time':    int,
    'total_requests':       int,
    'served':               int,
    'expired':              int,
    'in_progress':          int,
    'active':               int,
    'serving_rate':         float,
}

AGGREGATE_FIELDS = {
    'cell':                 str,
    'weight_correction':    bool,
    'rebalancing':          bool,
    'seeds':                int,
    'failed':               int,
    'mean_min_utility':     float,
    'mean_utility_std':     float,
    'mean_avg_utility':     float,
    'mean_serving_rate':    float,
}

COMPARISON_FIELDS = {
    'auction_serving_rate':         float,
    'oracle_serving_rate':          float,
    'serving_rate_difference':      float,
    'auction_avg_utility':          float,
    'oracle_avg_utility':           float,
    'avg_utility_difference':       float,
    'max_cycle_gap':                float,
    'bound_violations':             int,
}

REPORT_SCHEMA = {
    'common': {
        'command':      str,
        'version':      str,
        'scenario':     dict,
        'duration':     float,
    },
    'simulate': {
        'seed':         int,
        'metrics':      dict,
    },
    'batch': {
        'seeds':        list,
        'rows':         list,
        'aggregates':   list,
    },
    'oracle-compare': {
        'seeds':        list,
        'method':       str,
        'rows':         list,
        'summary':      dict,
    },
}


def read_config(path):
    """Reads a scenario document

    Parameters
    ----------
    path : str
        Path to the scenario JSON file

    Returns
    -------
    document : dict
        Scenario fields, network path made absolute

    Raises
    ------
    ConfigError
        File missing or not a JSON object
    """

    if not os.path.isfile(path):
        raise ERRORS.ConfigError('Scenario file {} not found'.format(path))
    try:
        with open(path, 'r') as fp:
            document = json.load(fp)
    except json.decoder.JSONDecodeError as e:
        raise ERRORS.ConfigError('Scenario file {} is not valid JSON: {}'.format(path, e))
    if not isinstance(document, dict):
        raise ERRORS.ConfigError('Scenario file {} must hold a JSON object'.format(path))
    network = document.get('network')
    if isinstance(network, str) and not os.path.isabs(network):
        document['network'] = os.path.join(os.path.dirname(os.path.abspath(path)), network)
    LOGGER.write('Read scenario {}: {}'.format(path, document))
    return document


def apply_overrides(document, overrides):
    """Applies command line overrides, skipping unset values

    Parameters
    ----------
    document : dict
        Scenario fields
    overrides : dict
        Field overrides, None meaning not given

    Returns
    -------
    document : dict
        New scenario dict
    """

    updated = dict(document)
    for key, value in overrides.items():
        if value is not None:
            updated[key] = value
    return updated


def load_scenario(path, overrides=None):
    """Reads a scenario file into a validated ScenarioConfig

    Parameters
    ----------
    path : str
        Path to the scenario JSON file
    overrides : dict
        Field overrides, None values ignored

    Returns
    -------
    config : ScenarioConfig
        Validated scenario
    """

    import pyfairmod.sim as SIM
    document = apply_overrides(read_config(path), overrides or {})
    try:
        return SIM.ScenarioConfig.from_dict(document)
    except TypeError as e:
        raise ERRORS.ConfigError('Invalid scenario {}: {}'.format(path, e))


def read_network_document(path):
    """Reads a map document

    Raises
    ------
    MapNotFoundError
        File does not exist
    MapSchemaError
        File is not valid JSON
    """

    if not os.path.isfile(path):
        raise ERRORS.MapNotFoundError('Map not found: {}'.format(path))
    try:
        with open(path, 'r') as fp:
            return json.load(fp)
    except json.decoder.JSONDecodeError as e:
        raise ERRORS.MapSchemaError('Map file {} is not valid JSON: {}'.format(path, e))


def write_network_document(path, document):
    with open(path, 'w') as fp:
        json.dump(document, fp, indent=2, sort_keys=True)
    LOGGER.write('Wrote map with {} nodes to {}'.format(len(document['nodes']), path))


def _check_fields(document, schema, where):
    if not isinstance(document, dict):
        raise ERRORS.ReportSchemaError('{} must be an object'.format(where))
    for name, kind in schema.items():
        if name not in document:
            raise ERRORS.ReportSchemaError('{} lacks field {}'.format(where, name))
        value = document[name]
        # integers are valid reals, booleans are not numbers here
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            continue
        if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
            raise ERRORS.ReportSchemaError('{} field {} must be {}, got {!r}'.format(where, name, kind.__name__, value))


def validate_report(report):
    """Checks a report against REPORT_SCHEMA

    Parameters
    ----------
    report : dict
        Report document

    Raises
    ------
    ReportSchemaError
        A field is missing or has the wrong type
    """

    _check_fields(report, REPORT_SCHEMA['common'], 'report')
    command = report['command']
    if command not in REPORT_SCHEMA:
        raise ERRORS.ReportSchemaError('Unknown report command {}'.format(command))
    _check_fields(report, REPORT_SCHEMA[command], 'report')
    if command == 'simulate':
        _check_fields(report['metrics'], METRICS_FIELDS, 'metrics')
    elif command == 'batch':
        for i, row in enumerate(report['rows']):
            if row.get('error') is None:
                _check_fields(row.get('metrics'), METRICS_FIELDS, 'row {} metrics'.format(i))
        for i, aggregate in enumerate(report['aggregates']):
            # cells without a successful seed have no means
            schema = AGGREGATE_FIELDS if aggregate.get('seeds') else {name: kind for name, kind in AGGREGATE_FIELDS.items() if not name.startswith('mean_')}
            _check_fields(aggregate, schema, 'aggregate {}'.format(i))
    elif command == 'oracle-compare':
        for i, row in enumerate(report['rows']):
            _check_fields(row.get('auction'), METRICS_FIELDS, 'row {} auction'.format(i))
            _check_fields(row.get('oracle'), METRICS_FIELDS, 'row {} oracle'.format(i))
        _check_fields(report['summary'], COMPARISON_FIELDS, 'summary')


def write_report(path, report):
    """Validates and writes a report document
    """

    validate_report(report)
    with open(path, 'w') as fp:
        json.dump(report, fp, indent=2, sort_keys=True)
    LOGGER.write('Wrote {} report to {}'.format(report['command'], path))


def _flatten(row, prefix=''):
    flat = {}
    for key, value in row.items():
        name = '{}{}'.format(prefix, key)
        if isinstance(value, dict):
            flat.update(_flatten(value, name + '.'))
        elif isinstance(value, list):
            flat[name] = ' '.join(str(item) for item in value)
        else:
            flat[name] = value
    return flat


def write_table(path, rows):
    """Writes report rows as a comma separated table, nested fields joined with dots

    Parameters
    ----------
    path : str
        Output path
    rows : list of dict
        Rows, all flattened to the union of their columns
    """

    flat_rows = [_flatten(row) for row in rows]
    columns = []
    for row in flat_rows:
        for column in row:
            if column not in columns:
                columns.append(column)
    with open(path, 'w', newline='') as fp:
        writer = csv.DictWriter(fp, fieldnames=columns)
        writer.writeheader()
        for row in flat_rows:
            writer.writerow(row)
    LOGGER.write('Wrote table with {} rows to {}'.format(len(flat_rows), path))
