"""Fair distributed assignment of temporal-logic ride requests, entry point of the pyfairmod command line

Ride requests are scLTL formulas compiled to DFAs. Vehicles plan joint routes in product
automata, bid for requests in a message-passing auction with utility-history weight
correction, and vacant vehicles reposition toward nodes with a high potential utility.

Functions
---------
parse_args()
    Parses user arguments
run_command()
    Dispatches parsed arguments to a command function
main()
    Program entrypoint
"""

# Core Python Utilities
import argparse
import sys

# pyfairmod modules
import pyfairmod.logger as LOGGER


# Module version + copyright
__version__     = '0.1.0'
__copyright__   = '2023-2024'


def parse_args(argv=None):
    """Function that parses user arguments for pyfairmod

    Parameters
    ----------
    argv : list of str
        Arguments, sys.argv[1:] if None

    Returns
    -------
    args : dict
        Parsed arguments, 'command' naming the subcommand
    """

    parser = argparse.ArgumentParser(prog='pyfairmod', description='Simulator for fair distributed assignment of scLTL ride requests.')
    parser.add_argument('-d', '--debug',            action='store_true', help='Flag that enables debug logging.')
    parser.add_argument('-l', '--log-file',         help='Path of the debug log, .pyfairmod/<date>.log by default.')
    parser.add_argument('-v', '--version',          action='store_true', help='Print version information and exit.')
    subparsers = parser.add_subparsers(dest='command')

    simulate = subparsers.add_parser('simulate', help='Run one scenario.')
    simulate.add_argument('--config',               required=True, help='Scenario JSON file.')
    simulate.add_argument('--seed',                 type=int, help='Overrides the scenario seed.')
    simulate.add_argument('--out',                  required=True, help='Report JSON file.')
    simulate.add_argument('--table',                help='Optional comma separated metrics table.')
    simulate.add_argument('--events',               help='Optional line-delimited JSON event log.')
    simulate.add_argument('--trace',                help='Optional line-delimited JSON auction message trace.')

    batch = subparsers.add_parser('batch', help='Run seeds times toggle cells.')
    batch.add_argument('--config',                  required=True, help='Scenario JSON file.')
    batch.add_argument('--seeds',                   required=True, help='Seed range a..b or comma separated seeds.')
    batch.add_argument('--toggles',                 default='all', help='all, or comma separated cells among none, weight_correction, rebalancing, both.')
    batch.add_argument('--jobs',                    type=int, default=1, help='Number of worker processes.')
    batch.add_argument('--out',                     required=True, help='Report JSON file.')
    batch.add_argument('--table',                   help='Optional comma separated table of rows and aggregates.')

    gen_map = subparsers.add_parser('gen-map', help='Generate a synthetic grid map.')
    gen_map.add_argument('--kind',                  required=True, help='uniform, center, corner or two_peaks.')
    gen_map.add_argument('--size',                  type=int, help='Grid side, at least 2.')
    gen_map.add_argument('--rows',                  type=int, help='Grid rows, overrides --size.')
    gen_map.add_argument('--cols',                  type=int, help='Grid columns, --rows or --size by default.')
    gen_map.add_argument('--min-weight',            type=int, default=1, help='Smallest edge travel time.')
    gen_map.add_argument('--max-weight',            type=int, default=1, help='Largest edge travel time.')
    gen_map.add_argument('--peak-mass',             type=float, default=0.5, help='Probability mass of each peak.')
    gen_map.add_argument('--spread',                type=int, default=2, help='Hop radius of each peak.')
    gen_map.add_argument('--seed',                  type=int, default=0, help='Edge weight seed.')
    gen_map.add_argument('--out',                   required=True, help='Map JSON file.')

    compare = subparsers.add_parser('oracle-compare', help='Compare the auction with the centralized oracle.')
    compare.add_argument('--config',                required=True, help='Scenario JSON file.')
    compare.add_argument('--seeds',                 required=True, help='Seed range a..b or comma separated seeds.')
    compare.add_argument('--method',                default='exhaustive', choices=['exhaustive', 'hungarian'], help='Oracle method.')
    compare.add_argument('--out',                   required=True, help='Report JSON file.')
    compare.add_argument('--table',                 help='Optional comma separated per-seed table.')

    args = vars(parser.parse_args(argv))

    if args['version']:
        print('pyfairmod v{}\n'.format(__version__))
        print('BSD-3-Clause License')
        print('Copyright (c) {}\n'.format(__copyright__))
        exit()

    if args['command'] is None:
        parser.print_usage()
        exit(2)
    if args['command'] == 'gen-map' and args['rows'] is None and args['size'] is None:
        parser.error('gen-map needs --size or --rows')

    return args


def run_command(args):
    """Dispatches parsed arguments to a command function

    Parameters
    ----------
    args : dict
        Output of parse_args()

    Returns
    -------
    out : dict or str
        Command output or error message
    err : int
        Exit code
    """

    import pyfairmod.commands as COMMANDS

    command = args['command']
    if command == 'simulate':
        return COMMANDS.cmd_simulate(args['config'], args['out'], seed=args['seed'], table_path=args['table'],
                                     events_path=args['events'], trace_path=args['trace'])
    if command == 'gen-map':
        return COMMANDS.cmd_gen_map(args['kind'], args['rows'] or args['size'], args['out'], cols=args['cols'],
                                    min_weight=args['min_weight'], max_weight=args['max_weight'],
                                    peak_mass=args['peak_mass'], spread=args['spread'], seed=args['seed'])
    try:
        seeds = COMMANDS.parse_seeds(args['seeds'])
    except COMMANDS.USAGE_ERRORS as e:
        return str(e), COMMANDS.EXIT_USAGE
    if command == 'batch':
        return COMMANDS.cmd_batch(args['config'], seeds, args['out'], toggles=args['toggles'], jobs=args['jobs'],
                                  table_path=args['table'])
    return COMMANDS.cmd_oracle_compare(args['config'], seeds, args['out'], method=args['method'], table_path=args['table'])


def main(argv=None):
    """Entry point for pyfairmod. Parses arguments, runs the command and exits with its code
    """

    args = parse_args(argv)

    if args['debug']:
        LOGGER.set_log_file_path(args['log_file'] or LOGGER.default_log_file_path())
        LOGGER.toggle_logging()
        LOGGER.write('Initialized debug logging')
    LOGGER.write('Parsed args: {}'.format(args))

    out, err = run_command(args)
    if err != 0:
        print('ERROR - {}'.format(out), file=sys.stderr)
    else:
        print('Finished {}, output written to {}'.format(args['command'], args['out']))
    LOGGER.close_logger()
    exit(err)
