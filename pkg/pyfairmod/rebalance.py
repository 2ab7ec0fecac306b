"""Repositioning of vacant vehicles toward locations with a high potential utility

The potential utility of a node is Pr(s) / (1 + N) * U_avg(s), N being the number of idle
vehicles near s. A vehicle scans hop rings around its position and moves to the best node of a
ring only if that node beats the current target by the factor k_a.

Classes
-------
RebalanceDecision
    Target chosen for one vehicle

Functions
---------
potential_utility()
    Potential utility of a node
idle_counts()
    Number of idle vehicles near every node
find_rebalance_target()
    Target node of one vacant vehicle
run_rebalancing()
    Targets of all vacant vehicles, decided one vehicle at a time
"""

from dataclasses import dataclass

import pyfairmod.errors as ERRORS
import pyfairmod.logger as LOGGER
import pyfairmod.network as NETWORK


DEFAULT_K_W = 3
DEFAULT_K_A = 1.5
DEFAULT_PROXIMITY_RADIUS = 1


@dataclass(frozen=True)
class RebalanceDecision:
    """Target chosen for one vehicle

    Attributes
    ----------
    vehicle_id : int
        Vehicle
    target : str
        Target node, the current position if the vehicle stays
    potential : float
        Potential utility of the target when decided
    route : tuple of str
        Shortest route from the position to the target
    """

    vehicle_id: int
    target: str
    potential: float
    route: tuple

    @property
    def stays(self):
        return len(self.route) == 1


def potential_utility(network, node, idle_count):
    """Potential utility of a node

    Parameters
    ----------
    network : RoadNetwork
        Road network
    node : str
        Node
    idle_count : int
        Number of idle vehicles nearby

    Returns
    -------
    potential : float
        arrival probability / (1 + idle_count) * average request utility
    """

    return network.arrival_prob(node) / (1 + idle_count) * network.avg_request_utility(node)


def idle_counts(network, positions, radius=DEFAULT_PROXIMITY_RADIUS):
    """Number of idle vehicles within a hop radius of every node

    Parameters
    ----------
    network : RoadNetwork
        Road network
    positions : list of str
        Nodes of the idle vehicles, one entry per vehicle
    radius : int
        Proximity radius in hops, edge direction ignored

    Returns
    -------
    counts : dict
        Map node -> idle vehicle count, nodes without idle vehicles nearby omitted
    """

    counts = {}
    for position in positions:
        for node in NETWORK.nodes_within(network, position, radius):
            counts[node] = counts.get(node, 0) + 1
    return counts


def find_rebalance_target(network, vehicle, k_w=DEFAULT_K_W, k_a=DEFAULT_K_A, counts=None):
    """Target node of one vacant vehicle

    Rings 1..k_w are scanned in order. The best node of a ring, ties going to the lowest id,
    replaces the target if its potential is at least k_a times the target potential. A target
    with zero potential is only replaced by a node with positive potential.

    Parameters
    ----------
    network : RoadNetwork
        Road network
    vehicle : VehicleState
        Vacant vehicle
    k_w : int
        Number of hop rings
    k_a : float
        Improvement factor, > 1
    counts : dict
        Idle vehicle counts from idle_counts(), the vehicle itself excluded

    Returns
    -------
    decision : RebalanceDecision
        Chosen target with its route
    """

    if k_a <= 1:
        raise ERRORS.ConfigError('Rebalancing factor k_a must exceed 1, got {}'.format(k_a))
    counts = counts or {}

    def potential(node):
        return potential_utility(network, node, counts.get(node, 0))

    target = vehicle.position
    best = potential(target)
    for ring in NETWORK.neighbor_rings(network, vehicle.position, k_w):
        if not ring:
            continue
        candidate = max(sorted(ring, key=NETWORK.node_sort_key), key=potential)
        value = potential(candidate)
        if (best > 0 and value >= k_a * best) or (best == 0 and value > 0):
            target, best = candidate, value
    route = NETWORK.shortest_route(network, vehicle.position, target)
    return RebalanceDecision(vehicle.id, target, best, tuple(route))


def run_rebalancing(network, vacant_vehicles, k_w=DEFAULT_K_W, k_a=DEFAULT_K_A, radius=DEFAULT_PROXIMITY_RADIUS, other_idle=()):
    """Targets of all vacant vehicles, decided in ascending vehicle id order

    A decided vehicle counts as idle at its target for the vehicles decided after it.

    Parameters
    ----------
    network : RoadNetwork
        Road network
    vacant_vehicles : list of VehicleState
        Stationary vacant vehicles without committed requests
    k_w, k_a : int, float
        Ring count and improvement factor
    radius : int
        Proximity radius for idle counts
    other_idle : list of str
        Positions of further idle vehicles that are not rebalanced now

    Returns
    -------
    decisions : dict
        Map vehicle id -> RebalanceDecision
    """

    vehicles = sorted(vacant_vehicles, key=lambda vehicle: vehicle.id)
    spots = {vehicle.id: vehicle.position for vehicle in vehicles}
    decisions = {}
    for vehicle in vehicles:
        positions = list(other_idle) + [spot for vehicle_id, spot in spots.items() if vehicle_id != vehicle.id]
        decision = find_rebalance_target(network, vehicle, k_w, k_a, idle_counts(network, positions, radius))
        decisions[vehicle.id] = decision
        spots[vehicle.id] = decision.target
    moving = [decision for decision in decisions.values() if not decision.stays]
    if decisions:
        LOGGER.write('Rebalancing decided for {} vehicles, {} moving'.format(len(decisions), len(moving)))
    if LOGGER.is_enabled():
        for decision in moving:
            LOGGER.write('Vehicle {} rebalances to {}, potential {:.3f}'.format(decision.vehicle_id, decision.target, decision.potential))
    return decisions
