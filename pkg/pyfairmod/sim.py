"""Discrete-time fleet simulation with periodic auctions and rebalancing

The world advances one second per step. Every cycle_period seconds the released, unassigned
requests are auctioned among vehicles with free seats, winners commit the joint route of their
plan, and vacant idle vehicles are rebalanced. Vehicles earn one utility unit per occupied seat
and second.

Classes
-------
ScenarioConfig
    Every tunable parameter of one simulation run
RequestRecord
    One transportation request and its life cycle
VehicleState
    One vehicle, its load and its route
WorldState
    Clock, fleet, requests and the event log of one run
MetricsReport
    Fairness and efficiency metrics of a finished run

Functions
---------
make_request()
    Builds a request record from a formula
generate_requests()
    Seeded random request stream of a scenario
place_vehicles()
    Seeded uniform initial vehicle positions
step_world()
    Advances the world by one second
run_cycle()
    Assignment and rebalancing at the start of a cycle
simulate()
    Runs a whole scenario and returns the final world
run_simulation()
    Runs a whole scenario and returns its metrics
compute_metrics()
    Metrics of a finished world
utility_from_events()
    Recomputes vehicle utilities from pick-up and drop-off events
export_event_log()
    Writes the event log as line-delimited JSON
"""

import json
from dataclasses import dataclass, field, fields, asdict

import numpy as np

import pyfairmod.errors as ERRORS
import pyfairmod.logger as LOGGER
import pyfairmod.scltl as SCLTL
import pyfairmod.network as NETWORK
import pyfairmod.planner as PLANNER
import pyfairmod.auction as AUCTION
import pyfairmod.oracle as ORACLE
import pyfairmod.rebalance as REBALANCE


PATTERNS = ['seq2', 'alt-then', 'then-alt']

ARRIVAL_PROCESSES = ('exact', 'poisson')

ASSIGNMENT_MODES = ('auction', 'oracle')

MAX_SAMPLE_TRIES = 100


@dataclass
class ScenarioConfig:
    """Every tunable parameter of one simulation run

    Durations are whole seconds. epsilon None means 1 / number of bidders, max_rounds None
    means 50 rounds per offered request.
    """

    network: str = None
    horizon: int = 1000
    n_vehicles: int = 10
    capacity: int = 4
    n_requests: int = 100
    omega_max: int = 40
    delta_max: int = 100
    cycle_period: int = 10
    seats: int = 1
    alpha: float = AUCTION.DEFAULT_ALPHA
    epsilon: float = None
    k_w: int = REBALANCE.DEFAULT_K_W
    k_a: float = REBALANCE.DEFAULT_K_A
    proximity_radius: int = REBALANCE.DEFAULT_PROXIMITY_RADIUS
    seed: int = 0
    weight_correction: bool = True
    rebalancing: bool = True
    arrival_process: str = 'exact'
    assignment: str = 'auction'
    oracle_method: str = 'exhaustive'
    record_oracle_gap: bool = False
    price_init: str = 'min-sigma'
    max_rounds: int = None
    dfa_max_states: int = SCLTL.DEFAULT_MAX_STATES
    shuffle_seed: int = None
    record_trace: bool = False
    probability_map: dict = None


    @classmethod
    def from_dict(cls, document):
        """Builds a config from a dict, rejecting unknown keys

        Parameters
        ----------
        document : dict
            Config values

        Returns
        -------
        config : ScenarioConfig
            Validated config
        """

        known = {item.name for item in fields(cls)}
        unknown = sorted(set(document) - known)
        if unknown:
            raise ERRORS.ConfigError('Unknown scenario fields: {}'.format(', '.join(unknown)))
        config = cls(**document)
        config.validate()
        return config


    def to_dict(self):
        return asdict(self)


    def validate(self):
        """Checks value ranges

        Raises
        ------
        ConfigError
            Some value is out of range
        """

        for name in ['horizon', 'n_vehicles', 'capacity', 'omega_max', 'delta_max', 'cycle_period', 'seats', 'k_w',
                     'proximity_radius', 'dfa_max_states']:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ERRORS.ConfigError('{} must be a positive integer, got {}'.format(name, value))
        if isinstance(self.n_requests, bool) or not isinstance(self.n_requests, int) or self.n_requests < 0:
            raise ERRORS.ConfigError('n_requests must be a non-negative integer, got {}'.format(self.n_requests))
        if self.seats > self.capacity:
            raise ERRORS.ConfigError('Requests of {} seats never fit vehicles of capacity {}'.format(self.seats, self.capacity))
        if self.epsilon is not None and not self.epsilon > 0:
            raise ERRORS.ConfigError('epsilon must be positive, got {}'.format(self.epsilon))
        if not self.k_a > 1:
            raise ERRORS.ConfigError('k_a must exceed 1, got {}'.format(self.k_a))
        if self.max_rounds is not None and self.max_rounds < 1:
            raise ERRORS.ConfigError('max_rounds must be positive, got {}'.format(self.max_rounds))
        if self.arrival_process not in ARRIVAL_PROCESSES:
            raise ERRORS.ConfigError('Unknown arrival process {}'.format(self.arrival_process))
        if self.assignment not in ASSIGNMENT_MODES:
            raise ERRORS.ConfigError('Unknown assignment mode {}'.format(self.assignment))
        if self.oracle_method not in ORACLE.ORACLE_METHODS:
            raise ERRORS.ConfigError('Unknown oracle method {}'.format(self.oracle_method))
        if self.price_init not in AUCTION.PRICE_INIT_STRATEGIES:
            raise ERRORS.ConfigError('Unknown price initialization {}'.format(self.price_init))
        if self.probability_map is not None:
            if not isinstance(self.probability_map, dict) or 'kind' not in self.probability_map:
                raise ERRORS.ConfigError('probability_map needs at least a kind')
            if self.probability_map['kind'] not in NETWORK.PROBABILITY_MAP_KINDS:
                raise ERRORS.ConfigError('Unknown probability map kind {}'.format(self.probability_map['kind']))


    @property
    def effective_alpha(self):
        return self.alpha if self.weight_correction else 0.0


@dataclass
class RequestRecord:
    """One transportation request and its life cycle

    status moves from active to in-progress to completed, or from active to expired. An active
    request with a vehicle is committed to that vehicle but not picked up yet.
    """

    id: int
    pick_node: str
    formula: object
    dfa: object
    t_req: int
    t_star: int
    omega_max: int
    delta_max: int
    seats: int = 1
    pattern: str = None
    status: str = 'active'
    vehicle: int = None
    t_asgmt: int = None
    t_pick: int = None
    t_drop: int = None
    dfa_state: int = None

    @property
    def sigma(self):
        if self.t_drop is None or self.t_asgmt is None:
            return None
        return self.t_drop - self.t_asgmt

    @property
    def delay(self):
        if self.t_drop is None:
            return None
        return self.t_drop - self.t_req - self.t_star


@dataclass
class VehicleState:
    """One vehicle, its load and its route

    Attributes
    ----------
    id : int
        Vehicle id
    position : str
        Last node reached
    capacity : int
        Seats Cap_v
    onboard : list of RequestRecord
        Picked up requests
    assigned : list of RequestRecord
        Committed requests waiting for pick-up
    route_nodes : list of str
        Upcoming nodes, the vehicle travels toward route_nodes[0] when non-empty
    route_times : list of int
        Arrival time at every upcoming node
    utility : float
        Cumulative utility U_v
    rebalancing : bool
        True while driving to a rebalancing target
    """

    id: int
    position: str
    capacity: int
    onboard: list = field(default_factory=list)
    assigned: list = field(default_factory=list)
    route_nodes: list = field(default_factory=list)
    route_times: list = field(default_factory=list)
    utility: float = 0.0
    rebalancing: bool = False

    @property
    def free_seats(self):
        return self.capacity - sum(request.seats for request in self.onboard)

    @property
    def unreserved_seats(self):
        return self.free_seats - sum(request.seats for request in self.assigned)

    @property
    def status(self):
        free = self.free_seats
        if free == 0:
            return 'occupied'
        if free < self.capacity:
            return 'available'
        return 'rebalancing' if self.rebalancing else 'vacant'


class WorldState:
    """Clock, fleet, requests and the event log of one run

    Attributes
    ----------
    network : RoadNetwork
        Road network
    config : ScenarioConfig
        Scenario
    clock : int
        Current time
    vehicles : list of VehicleState
        Fleet in id order
    requests : list of RequestRecord
        Every generated request in release order
    released : int
        Number of requests released so far
    events : list of dict
        Event log
    oracle_gaps : list of dict
        Per auction stage comparison with the oracle, when recorded
    message_trace : list of dict
        Auction messages of all cycles
    auction_rounds : int
        Rounds run by all auctions
    round_limit_hits : int
        Auctions stopped by the round limit
    """

    def __init__(self, network, config, requests, vehicles):
        """Constructor for WorldState
        """

        self.network            = network
        self.config             = config
        self.clock              = 0
        self.vehicles           = sorted(vehicles, key=lambda vehicle: vehicle.id)
        self.requests           = sorted(requests, key=lambda request: (request.t_req, request.id))
        self.released           = 0
        self.events             = []
        self.oracle_gaps        = []
        self.message_trace      = []
        self.auction_rounds     = 0
        self.round_limit_hits   = 0


    def log_event(self, kind, **details):
        event = {'time': self.clock, 'kind': kind}
        event.update(details)
        self.events.append(event)


    def released_requests(self):
        return self.requests[:self.released]


    def offered_requests(self):
        return [request for request in self.released_requests() if request.status == 'active' and request.vehicle is None]


    def status_counts(self):
        counts = {'active': 0, 'in-progress': 0, 'completed': 0, 'expired': 0}
        for request in self.requests:
            counts[request.status] += 1
        return counts


    def check_invariants(self):
        """Raises WorldConsistencyError when capacities or request states are inconsistent
        """

        for vehicle in self.vehicles:
            if not 0 <= vehicle.free_seats <= vehicle.capacity:
                raise ERRORS.WorldConsistencyError('Vehicle {} has {} free seats of {}'.format(vehicle.id, vehicle.free_seats, vehicle.capacity))
            if any(request.status != 'in-progress' for request in vehicle.onboard):
                raise ERRORS.WorldConsistencyError('Vehicle {} carries a request that is not in progress'.format(vehicle.id))
            if vehicle.route_times and vehicle.route_times[0] <= self.clock:
                raise ERRORS.WorldConsistencyError('Vehicle {} missed its arrival at {}'.format(vehicle.id, vehicle.route_times[0]))


#--------------------------------
# Requests and fleet
#--------------------------------


def make_request(network, request_id, pick_node, formula, t_req, omega_max, delta_max, seats=1, pattern=None,
                 max_states=SCLTL.DEFAULT_MAX_STATES):
    """Builds a request record, compiling its formula and computing its optimal satisfaction time

    Parameters
    ----------
    network : RoadNetwork
        Road network
    request_id : int
        Request id
    pick_node : str
        Pick-up node
    formula : Formula or str
        Request formula, parsed against the network alphabet if text
    t_req : int
        Release time
    omega_max, delta_max : int
        Waiting and delay bounds

    Returns
    -------
    request : RequestRecord
        New active request

    Raises
    ------
    InfeasibleRequestError
        No route satisfies the formula from the pick-up node
    """

    if isinstance(formula, str):
        formula = SCLTL.parse_formula(formula, network.alphabet)
    dfa = SCLTL.translate_to_dfa(formula, max_states=max_states)
    t_star = PLANNER.satisfaction_time_from(network, pick_node, dfa)
    return RequestRecord(id=request_id, pick_node=pick_node, formula=formula, dfa=dfa, t_req=int(t_req),
                         t_star=t_star, omega_max=omega_max, delta_max=delta_max, seats=seats, pattern=pattern)


def _seed_streams(seed):
    return np.random.SeedSequence(seed).spawn(2)


def _arrival_times(config, rng):
    if config.arrival_process == 'exact':
        times = np.sort(rng.uniform(0, config.horizon, size=config.n_requests))
        return [int(t) for t in np.floor(times)]
    times = []
    if config.n_requests == 0:
        return times
    current = rng.exponential(config.horizon / config.n_requests)
    while current < config.horizon:
        times.append(int(current))
        current += rng.exponential(config.horizon / config.n_requests)
    return times


def generate_requests(config, network):
    """Seeded random request stream of a scenario

    Pick-up nodes follow the arrival probabilities, patterns are uniform and destinations are
    uniform among the other nodes. A sample whose formula cannot be satisfied is drawn again.

    Parameters
    ----------
    config : ScenarioConfig
        Scenario
    network : RoadNetwork
        Road network

    Returns
    -------
    requests : list of RequestRecord
        Requests sorted by release time

    Raises
    ------
    RequestGenerationError
        No satisfiable request found within 100 samples
    """

    rng = np.random.default_rng(_seed_streams(config.seed)[0])
    probabilities = np.array([network.arrival_prob(node) for node in network.nodes])
    if probabilities.sum() <= 0:
        raise ERRORS.ConfigError('Arrival probabilities of the network sum to 0')
    probabilities = probabilities / probabilities.sum()
    requests = []
    for request_id, t_req in enumerate(_arrival_times(config, rng)):
        for _ in range(MAX_SAMPLE_TRIES):
            pick = network.nodes[rng.choice(len(network.nodes), p=probabilities)]
            kind = PATTERNS[rng.integers(len(PATTERNS))]
            destinations = NETWORK.sample_destinations(network, pick, kind, rng)
            if destinations is None:
                continue
            formula = SCLTL.instantiate_pattern(kind, network.location_proposition(pick), destinations)
            try:
                request = make_request(network, request_id, pick, formula, t_req, config.omega_max, config.delta_max,
                                       config.seats, kind, config.dfa_max_states)
            except ERRORS.InfeasibleRequestError:
                continue
            requests.append(request)
            break
        else:
            raise ERRORS.RequestGenerationError('No satisfiable request found for release time {}'.format(t_req))
    LOGGER.write('Generated {} requests over {} s'.format(len(requests), config.horizon))
    return requests


def place_vehicles(config, network):
    """Seeded uniform initial vehicle positions

    Parameters
    ----------
    config : ScenarioConfig
        Scenario
    network : RoadNetwork
        Road network

    Returns
    -------
    vehicles : list of VehicleState
        Vacant vehicles with ids 0..n_vehicles-1
    """

    rng = np.random.default_rng(_seed_streams(config.seed)[1])
    picks = rng.integers(len(network.nodes), size=config.n_vehicles)
    return [VehicleState(id=i, position=network.nodes[pick], capacity=config.capacity) for i, pick in enumerate(picks)]


#--------------------------------
# World dynamics
#--------------------------------


def _pick_up(world, vehicle, request, time):
    if vehicle.free_seats < request.seats:
        raise ERRORS.WorldConsistencyError('Vehicle {} has no seat for request {}'.format(vehicle.id, request.id))
    vehicle.assigned.remove(request)
    vehicle.onboard.append(request)
    request.dfa_state = request.dfa.step(request.dfa.initial, world.network.labels(request.pick_node))
    request.t_pick = time
    request.status = 'in-progress'
    world.events.append({'time': time, 'kind': 'pickup', 'vehicle': vehicle.id, 'request': request.id,
                         'node': request.pick_node, 'seats': request.seats})


def _drop_satisfied(world, vehicle, time):
    for request in list(vehicle.onboard):
        if request.dfa.is_accepting(request.dfa_state):
            vehicle.onboard.remove(request)
            request.t_drop = time
            request.status = 'completed'
            world.events.append({'time': time, 'kind': 'drop', 'vehicle': vehicle.id, 'request': request.id,
                                 'node': vehicle.position, 'seats': request.seats, 'sigma': request.sigma})


def _enter_node(world, vehicle, node, time):
    vehicle.position = node
    label = world.network.labels(node)
    for request in vehicle.onboard:
        request.dfa_state = request.dfa.step(request.dfa_state, label)
    for request in list(vehicle.assigned):
        if request.pick_node == node:
            _pick_up(world, vehicle, request, time)
    _drop_satisfied(world, vehicle, time)


def release_requests(world):
    while world.released < len(world.requests) and world.requests[world.released].t_req <= world.clock:
        request = world.requests[world.released]
        world.log_event('release', request=request.id, node=request.pick_node, pattern=request.pattern)
        world.released += 1


def step_world(world):
    """Advances the world by one second

    Vehicles first earn utility for the current second, then move. On entering a node the
    onboard DFAs read its label, committed requests waiting there are picked up and satisfied
    requests are dropped. Requests not picked up within their waiting bound expire.

    Parameters
    ----------
    world : WorldState
        World at time t

    Returns
    -------
    world : WorldState
        The same world at time t + 1
    """

    now = world.clock
    for vehicle in world.vehicles:
        vehicle.utility += vehicle.capacity - vehicle.free_seats
    for vehicle in world.vehicles:
        if vehicle.route_times and vehicle.route_times[0] == now + 1:
            node = vehicle.route_nodes.pop(0)
            vehicle.route_times.pop(0)
            _enter_node(world, vehicle, node, now + 1)
            if not vehicle.route_nodes:
                vehicle.rebalancing = False
    for request in world.released_requests():
        if request.status == 'active' and now + 1 > request.t_req + request.omega_max:
            request.status = 'expired'
            if request.vehicle is not None:
                world.vehicles[request.vehicle].assigned.remove(request)
            world.events.append({'time': now + 1, 'kind': 'expire', 'request': request.id, 'vehicle': request.vehicle})
    world.clock = now + 1
    world.check_invariants()
    return world


def commit_plan(world, vehicle, request, plan):
    """Makes a vehicle follow the joint route of a won plan

    A moving vehicle keeps its current edge, the plan starting at the next node. A vehicle that
    already stands at the pick-up node picks the request up immediately.
    """

    now = world.clock
    route = plan.route
    moving = bool(vehicle.route_nodes)
    if moving:
        if route.nodes[0] != vehicle.route_nodes[0] or route.start_time != vehicle.route_times[0]:
            raise ERRORS.WorldConsistencyError('Plan of vehicle {} does not continue its current edge'.format(vehicle.id))
        vehicle.route_nodes = list(route.nodes)
        vehicle.route_times = list(route.arrival_times)
    else:
        vehicle.route_nodes = list(route.nodes[1:])
        vehicle.route_times = list(route.arrival_times[1:])
    vehicle.rebalancing = False
    vehicle.assigned.append(request)
    request.vehicle = vehicle.id
    request.t_asgmt = now
    world.log_event('assign', vehicle=vehicle.id, request=request.id, sigma=plan.sigma, t_pick=plan.t_pick,
                    t_drop=plan.t_drop)
    if not moving and vehicle.position == request.pick_node:
        _pick_up(world, vehicle, request, now)
        _drop_satisfied(world, vehicle, now)


def _utility_matrix(vehicle_ids, request_ids, plans, reservation):
    return [[None if request_id not in plans[vehicle_id] else -reservation - plans[vehicle_id][request_id].sigma
             for request_id in request_ids] for vehicle_id in vehicle_ids]


def _record_oracle_gap(world, agents, offered, outcome, reservation, epsilon, stage):
    vehicle_ids = [agent.vehicle_id for agent in agents]
    request_ids = [request.id for request in offered]
    plans = {agent.vehicle_id: agent.plans for agent in agents}
    utilities = _utility_matrix(vehicle_ids, request_ids, plans, reservation)
    if not any(u is not None for row in utilities for u in row):
        return
    best = ORACLE.optimal_assignment_oracle(utilities, world.config.oracle_method)
    auction_total = sum(-reservation - plan.sigma for plan in outcome.plans.values())
    world.oracle_gaps.append({'time': world.clock, 'stage': stage, 'vehicles': len(vehicle_ids),
                              'requests': len(request_ids), 'auction_total': auction_total,
                              'oracle_total': best.total, 'gap': best.total - auction_total,
                              'bound': len(request_ids) * epsilon})


def assign_with_auction(world):
    """Auction stages of one cycle

    Winners keep their seats reserved, so a later stage only offers the requests still
    unassigned to vehicles that still have unreserved seats.
    """

    config = world.config
    offered = world.offered_requests()
    stage = 0
    while offered:
        vehicles = [vehicle for vehicle in world.vehicles if vehicle.unreserved_seats > 0]
        if not vehicles:
            break
        bus = AUCTION.MessageBus([vehicle.id for vehicle in vehicles], config.shuffle_seed, config.record_trace)
        epsilon = config.epsilon if config.epsilon is not None else 1.0 / len(vehicles)
        reservation = AUCTION.reservation_value(offered, world.clock)
        agents = AUCTION.build_agents(world.network, vehicles, offered, world.clock, bus, epsilon,
                                      config.effective_alpha, reservation, config.price_init)
        outcome = AUCTION.run_auction(agents, [request.id for request in offered], config.max_rounds)
        world.auction_rounds += outcome.rounds
        world.round_limit_hits += int(outcome.round_limit_reached)
        world.message_trace.extend(dict(record, time=world.clock, stage=stage) for record in bus.trace)
        if config.record_oracle_gap:
            _record_oracle_gap(world, agents, offered, outcome, reservation, epsilon, stage)
        if not outcome.plans:
            break
        by_id = {request.id: request for request in offered}
        for request_id, vehicle_id in sorted(outcome.assignment.items()):
            if vehicle_id is not None:
                commit_plan(world, world.vehicles[vehicle_id], by_id[request_id], outcome.plans[request_id])
        offered = world.offered_requests()
        stage += 1
    return stage


def assign_with_oracle(world):
    """Centralized stages of one cycle, solving each stage with the optimal assignment oracle
    """

    config = world.config
    offered = world.offered_requests()
    stage = 0
    while offered:
        vehicles = [vehicle for vehicle in world.vehicles if vehicle.unreserved_seats > 0]
        if not vehicles:
            break
        reservation = AUCTION.reservation_value(offered, world.clock)
        plans = {}
        for vehicle in vehicles:
            plans[vehicle.id] = {}
            for request in offered:
                plan = PLANNER.evaluate_service_plan(world.network, vehicle, request, world.clock)
                if plan is not None:
                    plans[vehicle.id][request.id] = plan
        vehicle_ids = [vehicle.id for vehicle in vehicles]
        request_ids = [request.id for request in offered]
        utilities = _utility_matrix(vehicle_ids, request_ids, plans, reservation)
        result = ORACLE.optimal_assignment_oracle(utilities, config.oracle_method)
        pairs = [(vehicle_ids[row], request_ids[column]) for row, column in enumerate(result.assignment) if column is not None]
        if not pairs:
            break
        by_id = {request.id: request for request in offered}
        for vehicle_id, request_id in sorted(pairs, key=lambda pair: pair[1]):
            commit_plan(world, world.vehicles[vehicle_id], by_id[request_id], plans[vehicle_id][request_id])
        offered = world.offered_requests()
        stage += 1
    return stage


def rebalance_fleet(world):
    """Sends stationary vacant vehicles without committed requests toward their rebalancing targets
    """

    config = world.config
    idle = [vehicle for vehicle in world.vehicles if vehicle.free_seats == vehicle.capacity and not vehicle.assigned]
    deciding = [vehicle for vehicle in idle if not vehicle.route_nodes]
    en_route = [vehicle.route_nodes[-1] for vehicle in idle if vehicle.route_nodes]
    decisions = REBALANCE.run_rebalancing(world.network, deciding, config.k_w, config.k_a, config.proximity_radius, en_route)
    for vehicle_id, decision in sorted(decisions.items()):
        if decision.stays:
            continue
        vehicle = world.vehicles[vehicle_id]
        times = []
        current = world.clock
        for source, target in zip(decision.route, decision.route[1:]):
            current += world.network.weight(source, target)
            times.append(current)
        vehicle.route_nodes = list(decision.route[1:])
        vehicle.route_times = times
        vehicle.rebalancing = True
        world.log_event('rebalance', vehicle=vehicle_id, node=decision.target, potential=decision.potential)


def run_cycle(world):
    """Assignment, then rebalancing if enabled, at the start of a cycle
    """

    if world.config.assignment == 'oracle':
        stages = assign_with_oracle(world)
    else:
        stages = assign_with_auction(world)
    if world.config.rebalancing:
        rebalance_fleet(world)
    LOGGER.write('Cycle at t={}: {} stages, {} requests waiting'.format(world.clock, stages, len(world.offered_requests())))


def load_scenario_network(config):
    """Loads the network of a scenario and applies its probability map, if any
    """

    if config.network is None:
        raise ERRORS.ConfigError('Scenario has no network')
    network = NETWORK.read_network_file(config.network)
    if config.probability_map is not None:
        mapping = config.probability_map
        probabilities = NETWORK.make_probability_map(network, mapping['kind'], mapping.get('peak_mass', 0.5), mapping.get('spread', 2))
        network = network.copy_with(arrival_prob=probabilities)
    return network


def simulate(config, network=None, requests=None, positions=None):
    """Runs a whole scenario

    Parameters
    ----------
    config : ScenarioConfig
        Scenario
    network : RoadNetwork
        Road network, loaded from config.network if None
    requests : list of RequestRecord
        Requests to serve, generated from the config if None
    positions : list of str
        Initial vehicle positions, drawn from the config seed if None

    Returns
    -------
    world : WorldState
        World at time horizon
    """

    config.validate()
    if network is None:
        network = load_scenario_network(config)
    if requests is None:
        requests = generate_requests(config, network)
    if positions is None:
        vehicles = place_vehicles(config, network)
    else:
        vehicles = [VehicleState(id=i, position=node, capacity=config.capacity) for i, node in enumerate(positions)]
    world = WorldState(network, config, requests, vehicles)
    LOGGER.write('Simulating {} vehicles and {} requests for {} s'.format(len(vehicles), len(requests), config.horizon))
    for t in range(config.horizon):
        release_requests(world)
        if t % config.cycle_period == 0:
            run_cycle(world)
        step_world(world)
    release_requests(world)
    return world


def run_simulation(config, network=None, requests=None, positions=None):
    """Runs a whole scenario and returns its metrics
    """

    return compute_metrics(simulate(config, network, requests, positions))


#--------------------------------
# Metrics and event log
#--------------------------------


@dataclass
class MetricsReport:
    """Fairness and efficiency metrics of a finished run

    Attributes
    ----------
    utilities : list of float
        U_v per vehicle id
    min_utility, utility_std, avg_utility, max_utility : float
        Aggregates of utilities, utility_std being the population standard deviation
    total_travel_time : int
        J, sum of sigma over completed requests
    total_requests, served, expired, in_progress, active : int
        Request counts by final status
    serving_rate : float
        served / total_requests, 1.0 without requests
    """

    utilities: list
    min_utility: float
    utility_std: float
    avg_utility: float
    max_utility: float
    total_travel_time: int
    total_requests: int
    served: int
    expired: int
    in_progress: int
    active: int
    serving_rate: float

    def to_dict(self):
        return asdict(self)


def compute_metrics(world):
    """Metrics of a finished world

    Parameters
    ----------
    world : WorldState
        World at the end of the run

    Returns
    -------
    report : MetricsReport
        Aggregated metrics
    """

    utilities = np.array([vehicle.utility for vehicle in world.vehicles], dtype=float)
    counts = world.status_counts()
    completed = [request for request in world.requests if request.status == 'completed']
    total = len(world.requests)
    return MetricsReport(
        utilities=[float(u) for u in utilities],
        min_utility=float(np.min(utilities)),
        utility_std=float(np.std(utilities)),
        avg_utility=float(np.mean(utilities)),
        max_utility=float(np.max(utilities)),
        total_travel_time=int(sum(request.sigma for request in completed)),
        total_requests=total,
        served=counts['completed'],
        expired=counts['expired'],
        in_progress=counts['in-progress'],
        active=counts['active'],
        serving_rate=counts['completed'] / total if total else 1.0,
    )


def utility_from_events(events, horizon):
    """Recomputes vehicle utilities from pick-up and drop-off events

    Parameters
    ----------
    events : list of dict
        Event log
    horizon : int
        End of the run, closing rides still in progress

    Returns
    -------
    utilities : dict
        Map vehicle id -> seats times seconds carried
    """

    utilities = {}
    picked = {}
    for event in events:
        if event['kind'] == 'pickup':
            picked[event['request']] = event
        elif event['kind'] == 'drop':
            start = picked.pop(event['request'])
            utilities[event['vehicle']] = utilities.get(event['vehicle'], 0) + event['seats'] * (event['time'] - start['time'])
    for event in picked.values():
        utilities[event['vehicle']] = utilities.get(event['vehicle'], 0) + event['seats'] * (horizon - event['time'])
    return utilities


def export_event_log(world, path):
    with open(path, 'w') as fp:
        for event in world.events:
            fp.write(json.dumps(event, sort_keys=True) + '\n')
