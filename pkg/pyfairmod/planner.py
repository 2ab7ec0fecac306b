"""Product automata of the road network with request DFAs, and service plan evaluation

A product state pairs a network node with one DFA state per tracked request. Requests that
still wait for pick-up are tracked with the PENDING_PICKUP marker: their DFA starts when the
route first reaches their pick-up node, by reading that node's label from the initial state.

Classes
-------
TrackedRequest
    One request DFA followed by a product automaton
ProductState
    Product automaton state
Route
    Timed sequence of network nodes
ServicePlan
    Joint route serving a candidate request next to a vehicle's current load
ProductAutomaton
    Lazily explored weighted product automaton

Functions
---------
build_product()
    Creates the product automaton handle
plan_route()
    Minimal travel time route to an accepting product state
replay_route()
    Steps tracked DFAs along a route
satisfaction_time_from()
    Minimal time to satisfy a request formula after pick-up at a node
optimal_satisfaction_time()
    Optimal satisfaction time t* of a request
planning_origin()
    Node and time a vehicle can start a new route from
evaluate_service_plan()
    Feasible joint service plan of a vehicle for a candidate request
"""

from dataclasses import dataclass, field

import pyfairmod.errors as ERRORS
import pyfairmod.network as NETWORK


PENDING_PICKUP = -1


@dataclass(frozen=True)
class TrackedRequest:
    """One request DFA followed by a product automaton

    Attributes
    ----------
    dfa : Dfa
        Request automaton
    state : int
        Current DFA state, or PENDING_PICKUP if the request is not picked up yet
    pick_node : str
        Pick-up node, required for pending requests
    """

    dfa: object
    state: int
    pick_node: str = None


@dataclass(frozen=True)
class ProductState:
    node: str
    dfa_states: tuple


@dataclass(frozen=True)
class Route:
    """Timed sequence of network nodes

    Attributes
    ----------
    nodes : tuple of str
        Visited nodes, the first one being the start
    start_time : int
        Time at the first node
    arrival_times : tuple of int
        Absolute arrival time at every node, arrival_times[0] == start_time
    """

    nodes: tuple
    start_time: int
    arrival_times: tuple

    @property
    def end_time(self):
        return self.arrival_times[-1]

    @property
    def duration(self):
        return self.arrival_times[-1] - self.start_time


@dataclass
class ServicePlan:
    """Joint route of a vehicle that serves a candidate request next to its current load

    Attributes
    ----------
    request_id : int
        Candidate request
    route : Route
        Joint route starting at the vehicle's planning origin
    t_asgmt : int
        Assignment time
    t_pick : int
        First arrival at the pick-up node
    t_drop : int
        Time the candidate's DFA accepts on the route
    sigma : int
        t_drop - t_asgmt
    delay : int
        t_drop - t_req - t*
    pick_node : str
        Candidate pick-up node
    tracked_drops : dict
        Map request id -> drop time on the route, for every request the route serves
    """

    request_id: int
    route: Route
    t_asgmt: int
    t_pick: int
    t_drop: int
    sigma: int
    delay: int
    pick_node: str
    tracked_drops: dict = field(default_factory=dict)


class ProductAutomaton:
    """Weighted product of the road network with request DFAs, explored on demand

    Attributes
    ----------
    network : RoadNetwork
        Road network
    tracked : list of TrackedRequest
        Followed request automata
    initial : ProductState
        Start state at the vehicle position

    Methods
    -------
    successors()
        Weighted successor states
    is_accepting()
        True if every tracked DFA accepts
    """

    def __init__(self, network, position, tracked):
        """Constructor for ProductAutomaton
        """

        if position not in network:
            raise ERRORS.InvalidProductStateError('Position {} is not a network node'.format(position))
        self.network = network
        self.tracked = [entry if isinstance(entry, TrackedRequest) else TrackedRequest(*entry) for entry in tracked]
        for entry in self.tracked:
            if entry.state == PENDING_PICKUP:
                if entry.pick_node not in network:
                    raise ERRORS.InvalidProductStateError('Pending request needs a valid pick-up node, got {}'.format(entry.pick_node))
            elif entry.state not in entry.dfa.states:
                raise ERRORS.InvalidProductStateError('State {} is not part of the request automaton'.format(entry.state))
        states = []
        for entry in self.tracked:
            if entry.state == PENDING_PICKUP and entry.pick_node == position:
                states.append(entry.dfa.step(entry.dfa.initial, network.labels(position)))
            else:
                states.append(entry.state)
        self.initial = ProductState(position, tuple(states))


    def step_states(self, states, node):
        """Advances every tracked DFA on entering a node
        """

        label = self.network.labels(node)
        stepped = []
        for entry, state in zip(self.tracked, states):
            if state == PENDING_PICKUP:
                if node == entry.pick_node:
                    state = entry.dfa.step(entry.dfa.initial, label)
            else:
                state = entry.dfa.step(state, label)
            stepped.append(state)
        return tuple(stepped)


    def successors(self, state):
        """Weighted successor states

        Parameters
        ----------
        state : ProductState
            Current product state

        Returns
        -------
        successors : list of tuple
            (ProductState, travel time) pairs in node order
        """

        return [(ProductState(node, self.step_states(state.dfa_states, node)), weight)
                for node, weight in self.network.successors(state.node)]


    def is_accepting(self, state):
        return all(q != PENDING_PICKUP and entry.dfa.is_accepting(q) for entry, q in zip(self.tracked, state.dfa_states))


def build_product(network, position, tracked):
    """Creates the product automaton of the network with tracked request DFAs

    Parameters
    ----------
    network : RoadNetwork
        Road network
    position : str
        Start node
    tracked : list
        TrackedRequest entries, or (dfa, state) / (dfa, state, pick_node) tuples

    Returns
    -------
    product : ProductAutomaton
        Product automaton handle

    Raises
    ------
    InvalidProductStateError
        Unknown position or DFA state
    """

    return ProductAutomaton(network, position, tracked)


def _search_product(product, cutoff):
    """Cached product search, keyed by the start node and the tracked requests

    A cached path stays valid for every cutoff at or above its cost, a cached miss for every
    cutoff at or below the one it was searched with.
    """

    cache = product.network.product_routes
    key = (product.initial.node, tuple(product.tracked))
    if key in cache:
        cost, path, searched = cache[key]
        if path is not None:
            return (cost, path) if cutoff is None or cost <= cutoff else None
        if path is None and (searched is None or (cutoff is not None and cutoff <= searched)):
            return None
    rank = product.network.node_rank
    result = NETWORK.lexicographic_shortest_path([product.initial], product.successors, product.is_accepting,
                                                 key=lambda state: (rank(state.node), state.dfa_states), cutoff=cutoff)
    if result is None:
        cache[key] = (None, None, cutoff)
    else:
        cache[key] = (result[0], result[1], cutoff)
    return result


def plan_route(product, start_time, cutoff=None):
    """Minimal travel time route from the initial state to an accepting product state

    Parameters
    ----------
    product : ProductAutomaton
        Product automaton
    start_time : int
        Time at the initial state
    cutoff : int
        Maximal route duration to explore, unbounded if None

    Returns
    -------
    route : Route
        Projection of the best product path on the network, None if infeasible
    """

    result = _search_product(product, cutoff)
    if result is None:
        return None
    _, path = result
    nodes = [state.node for state in path]
    times = [start_time]
    for source, target in zip(nodes, nodes[1:]):
        times.append(times[-1] + product.network.weight(source, target))
    return Route(tuple(nodes), start_time, tuple(times))


def replay_route(network, route, tracked):
    """Steps every tracked DFA along a route

    The first route node is taken as already entered: pending requests picked up there read
    its label, other states are used as given.

    Parameters
    ----------
    network : RoadNetwork
        Road network
    route : Route
        Route to replay
    tracked : list
        Same entries as for build_product()

    Returns
    -------
    progress : list of tuple
        (final state, pick time, accept time) per tracked request. Pick time is None for requests
        already aboard, accept time is None if the DFA never accepts
    """

    product = ProductAutomaton(network, route.nodes[0], tracked)
    states = list(product.initial.dfa_states)
    pick_times = [None] * len(states)
    accept_times = [None] * len(states)
    for i, entry in enumerate(product.tracked):
        if entry.pick_node is not None and states[i] != PENDING_PICKUP:
            pick_times[i] = route.start_time
        if states[i] != PENDING_PICKUP and entry.dfa.is_accepting(states[i]):
            accept_times[i] = route.start_time
    for node, time in zip(route.nodes[1:], route.arrival_times[1:]):
        stepped = product.step_states(tuple(states), node)
        for i, state in enumerate(stepped):
            if states[i] == PENDING_PICKUP and state != PENDING_PICKUP:
                pick_times[i] = time
            if accept_times[i] is None and state != PENDING_PICKUP and product.tracked[i].dfa.is_accepting(state):
                accept_times[i] = time
        states = list(stepped)
    return list(zip(states, pick_times, accept_times))


def satisfaction_time_from(network, pick_node, dfa):
    """Minimal time to satisfy a request formula once picked up at a node

    Parameters
    ----------
    network : RoadNetwork
        Road network
    pick_node : str
        Pick-up node, whose label the DFA reads first
    dfa : Dfa
        Request automaton

    Returns
    -------
    t_star : int
        Minimal travel time in seconds

    Raises
    ------
    InfeasibleRequestError
        No route satisfies the formula
    """

    state = dfa.step(dfa.initial, network.labels(pick_node))
    route = plan_route(build_product(network, pick_node, [TrackedRequest(dfa, state)]), 0)
    if route is None:
        raise ERRORS.InfeasibleRequestError('No route from {} satisfies the request'.format(pick_node))
    return route.duration


def optimal_satisfaction_time(network, request):
    """Optimal satisfaction time t* of a request, served alone from its release at the pick-up node

    Parameters
    ----------
    network : RoadNetwork
        Road network
    request : RequestRecord
        Request with pick_node and dfa

    Returns
    -------
    t_star : int
        Minimal travel time in seconds
    """

    return satisfaction_time_from(network, request.pick_node, request.dfa)


def planning_origin(vehicle, now):
    """Node and time a vehicle can start a new route from

    A vehicle travelling on an edge finishes it first.

    Parameters
    ----------
    vehicle : VehicleState
        Vehicle
    now : int
        Current time

    Returns
    -------
    origin : tuple
        (node, time, moving)
    """

    if vehicle.route_nodes:
        return vehicle.route_nodes[0], vehicle.route_times[0], True
    return vehicle.position, now, False


def _pending_entry(network, request, origin):
    if origin == request.pick_node:
        return TrackedRequest(request.dfa, request.dfa.step(request.dfa.initial, network.labels(origin)), request.pick_node)
    return TrackedRequest(request.dfa, PENDING_PICKUP, request.pick_node)


def vehicle_tracked_requests(network, vehicle, origin, moving):
    """Tracked entries for everything a vehicle carries or has committed to pick up

    Parameters
    ----------
    network : RoadNetwork
        Road network
    vehicle : VehicleState
        Vehicle
    origin : str
        Planning origin node
    moving : bool
        True if the vehicle still has to enter origin, so onboard DFAs read its label

    Returns
    -------
    tracked : list of tuple
        (RequestRecord, TrackedRequest) pairs, onboard requests first
    """

    tracked = []
    label = network.labels(origin)
    for request in vehicle.onboard:
        state = request.dfa.step(request.dfa_state, label) if moving else request.dfa_state
        tracked.append((request, TrackedRequest(request.dfa, state)))
    for request in vehicle.assigned:
        tracked.append((request, _pending_entry(network, request, origin)))
    return tracked


def evaluate_service_plan(network, vehicle, request, now):
    """Feasible joint service plan of a vehicle for a candidate request

    The route is the shortest path of the product of the network with the DFAs of the onboard
    requests, the committed but not yet picked up requests and the candidate. The plan is
    rejected when any waiting or delay bound is violated on that route.

    Parameters
    ----------
    network : RoadNetwork
        Road network
    vehicle : VehicleState
        Bidding vehicle
    request : RequestRecord
        Candidate request
    now : int
        Current time, the assignment time of the plan

    Returns
    -------
    plan : ServicePlan
        Feasible plan, None if the vehicle cannot serve the request
    """

    reserved = sum(other.seats for other in vehicle.onboard + vehicle.assigned)
    if vehicle.capacity - reserved < request.seats:
        return None
    origin, start, moving = planning_origin(vehicle, now)
    reach = NETWORK.shortest_travel_time(network, origin, request.pick_node)
    if reach is None or start + reach > request.t_req + request.omega_max:
        return None

    pairs = vehicle_tracked_requests(network, vehicle, origin, moving)
    pairs.append((request, _pending_entry(network, request, origin)))
    records = [pair[0] for pair in pairs]
    tracked = [pair[1] for pair in pairs]
    latest = max(record.t_req + record.t_star + record.delta_max for record in records)
    if latest < start:
        return None

    route = plan_route(build_product(network, origin, tracked), start, cutoff=latest - start)
    if route is None:
        return None
    drops = {}
    candidate = None
    for record, (_, t_pick, t_drop) in zip(records, replay_route(network, route, tracked)):
        if t_drop is None:
            return None
        if record.t_pick is None and t_pick is not None and t_pick > record.t_req + record.omega_max:
            return None
        if t_drop - record.t_req - record.t_star > record.delta_max:
            return None
        drops[record.id] = t_drop
        if record is request:
            candidate = (t_pick, t_drop)
    t_pick, t_drop = candidate
    return ServicePlan(request_id=request.id, route=route, t_asgmt=now, t_pick=t_pick, t_drop=t_drop,
                       sigma=t_drop - now, delay=t_drop - request.t_req - request.t_star,
                       pick_node=request.pick_node, tracked_drops=drops)
