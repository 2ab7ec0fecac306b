"""Centralized optimal assignment of requests to vehicles, used as a reference for the auction

Classes
-------
OracleResult
    Optimal assignment and its total utility

Functions
---------
optimal_assignment_oracle()
    Partial one-to-one assignment maximizing total utility
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

import pyfairmod.errors as ERRORS


ORACLE_CAP = 8

ORACLE_METHODS = ('exhaustive', 'hungarian')


@dataclass(frozen=True)
class OracleResult:
    """Optimal assignment and its total utility

    Attributes
    ----------
    assignment : tuple
        Request index per vehicle row, None for idle vehicles
    total : float
        Sum of the utilities of the assigned pairs
    """

    assignment: tuple
    total: float

    def as_dict(self):
        return {request: vehicle for vehicle, request in enumerate(self.assignment) if request is not None}


def _validate(utilities):
    if len(utilities) == 0 or any(len(row) == 0 for row in utilities):
        raise ERRORS.ConfigError('Utility matrix needs at least one vehicle and one request')
    width = len(utilities[0])
    if any(len(row) != width for row in utilities):
        raise ERRORS.ConfigError('Utility matrix rows differ in length')
    return len(utilities), width


def _exhaustive(utilities, n_requests):
    best = {'total': None, 'assignment': None}
    current = []
    taken = [False] * n_requests

    def search(row, total):
        if row == len(utilities):
            if best['total'] is None or total > best['total']:
                best['total'] = total
                best['assignment'] = tuple(current)
            return
        current.append(None)
        search(row + 1, total)
        current.pop()
        for column in range(n_requests):
            utility = utilities[row][column]
            if utility is None or taken[column]:
                continue
            taken[column] = True
            current.append(column)
            search(row + 1, total + utility)
            current.pop()
            taken[column] = False

    search(0, 0.0)
    return OracleResult(best['assignment'], best['total'])


def _hungarian(utilities, n_vehicles, n_requests):
    magnitude = sum(abs(u) for row in utilities for u in row if u is not None)
    forbidden = 1.0 + 2.0 * magnitude
    cost = np.zeros((n_vehicles, n_requests + n_vehicles))
    for row in range(n_vehicles):
        for column in range(n_requests):
            utility = utilities[row][column]
            cost[row, column] = forbidden if utility is None else -utility
    rows, columns = linear_sum_assignment(cost)
    assignment = [None] * n_vehicles
    total = 0.0
    for row, column in zip(rows, columns):
        # idle columns and forbidden pairs leave the vehicle unassigned
        if column < n_requests and utilities[row][column] is not None:
            assignment[row] = int(column)
            total += utilities[row][column]
    return OracleResult(tuple(assignment), total)


def optimal_assignment_oracle(utilities, method='exhaustive'):
    """Partial one-to-one assignment of requests to vehicles maximizing total utility

    The exhaustive method tries, vehicle by vehicle, staying idle first and then every free
    request in index order, keeping only strictly better totals. Among optimal assignments it
    therefore returns the lexicographically smallest vector, idle counting as smallest. The
    hungarian method solves the same problem with idle columns of zero utility, without a size cap.

    Parameters
    ----------
    utilities : list of list
        utilities[v][r] is the utility of giving request r to vehicle v, None if infeasible
    method : str
        exhaustive or hungarian

    Returns
    -------
    result : OracleResult
        Optimal assignment

    Raises
    ------
    OracleCapError
        Exhaustive search on more than 8 vehicles or requests
    """

    n_vehicles, n_requests = _validate(utilities)
    if method == 'exhaustive':
        if n_vehicles > ORACLE_CAP or n_requests > ORACLE_CAP:
            raise ERRORS.OracleCapError('Exhaustive oracle is capped at {0}x{0}, got {1}x{2}'.format(ORACLE_CAP, n_vehicles, n_requests))
        return _exhaustive(utilities, n_requests)
    if method == 'hungarian':
        return _hungarian(utilities, n_vehicles, n_requests)
    raise ERRORS.ConfigError('Unknown oracle method {}'.format(method))
