"""Distributed fair auction of ride requests among vehicle agents

Agents only talk through a MessageBus. Every round runs in three phases:

    I    every agent broadcasts its preferred request, or None if it abstains. An agent that
         holds a request from an earlier round re-broadcasts it.
    II   agents preferring the same request form a bidding group and exchange utility
         histories inside the group. Bidders add alpha * (U_v - U_avg) to their bids.
    III  group members exchange bids, the holder defending with its standing bid. The highest
         bid wins, ties going to the lowest vehicle id, and every member raises its local
         price of the request to the winning bid.

The auction stops after a round without bidders, after a round that changes no holder and no
local price, or after max_rounds rounds.

Classes
-------
Bid
    One bid of a vehicle on a request
AuctionMessage
    Message exchanged between agents
MessageBus
    Lossless per-sender FIFO message delivery with a trace
AuctionAgent
    One vehicle taking part in the auction
AuctionOutcome
    Assignment reached by the auction

Functions
---------
compute_bid()
    Best request and bid value of one vehicle
weight_correction()
    Fairness correction added to a bid
reservation_value()
    Value of staying idle, below any feasible assignment
run_auction()
    Runs the auction among agents until the assignment settles
"""

import json
import random
from collections import deque
from dataclasses import dataclass, field, asdict

import pyfairmod.errors as ERRORS
import pyfairmod.logger as LOGGER
import pyfairmod.planner as PLANNER


MESSAGE_KINDS = ('preferred-request', 'utility-history', 'bid')

PRICE_INIT_STRATEGIES = ('zero', 'min-sigma')

DEFAULT_ALPHA = -0.1


@dataclass(frozen=True)
class Bid:
    vehicle_id: int
    request_id: int
    value: float
    round: int = 0


@dataclass(frozen=True)
class AuctionMessage:
    """Message exchanged between agents

    Attributes
    ----------
    kind : str
        preferred-request, utility-history or bid
    sender : int
        Sending vehicle id
    payload : object
        dict with request_id and holding for preferred-request, float for utility-history, Bid for bid
    round : int
        Auction round
    """

    kind: str
    sender: int
    payload: object
    round: int


class MessageBus:
    """Lossless message delivery between agents

    Sent messages stay pending until flush() delivers them. Delivery may interleave senders in
    a seeded random order, but messages of one sender always arrive in sending order.

    Attributes
    ----------
    participants : list of int
        Vehicle ids of all agents
    trace : list of dict
        Every delivered message, in delivery order
    record_trace : bool
        If False, delivered messages are not traced

    Methods
    -------
    send()
        Queues a message to some recipients
    broadcast()
        Queues a message to every other participant
    flush()
        Delivers every pending message
    recv()
        Takes the oldest delivered message of a sender
    export_trace()
        Writes the trace as line-delimited JSON
    """

    def __init__(self, participants, shuffle_seed=None, record_trace=True):
        """Constructor for MessageBus
        """

        self.participants = list(participants)
        self.record_trace = record_trace
        self.trace = []
        self._pending = []
        self._inboxes = {participant: {} for participant in self.participants}
        self._rng = None if shuffle_seed is None else random.Random(shuffle_seed)


    def send(self, message, recipients):
        if message.kind not in MESSAGE_KINDS:
            raise ERRORS.ProtocolError('Unknown message kind {}'.format(message.kind))
        for recipient in recipients:
            if recipient not in self._inboxes:
                raise ERRORS.ProtocolError('Vehicle {} is not on the bus'.format(recipient))
            if recipient != message.sender:
                self._pending.append((recipient, message))


    def broadcast(self, message):
        self.send(message, self.participants)


    def flush(self):
        """Delivers every pending message
        """

        pending = self._pending
        self._pending = []
        if self._rng is not None:
            queues = {}
            for item in pending:
                queues.setdefault(item[1].sender, deque()).append(item)
            senders = sorted(queues)
            pending = []
            while senders:
                sender = self._rng.choice(senders)
                pending.append(queues[sender].popleft())
                if not queues[sender]:
                    senders.remove(sender)
        for recipient, message in pending:
            self._inboxes[recipient].setdefault(message.sender, deque()).append(message)
            if not self.record_trace:
                continue
            payload = asdict(message.payload) if isinstance(message.payload, Bid) else message.payload
            self.trace.append({'round': message.round, 'kind': message.kind, 'sender': message.sender,
                               'recipient': recipient, 'payload': payload})


    def recv(self, recipient, sender, kind):
        """Takes the oldest delivered message from a sender

        Parameters
        ----------
        recipient : int
            Receiving vehicle id
        sender : int
            Expected sender
        kind : str
            Expected message kind

        Returns
        -------
        message : AuctionMessage
            The delivered message

        Raises
        ------
        ProtocolError
            No message from sender was delivered, or it has another kind
        """

        queue = self._inboxes[recipient].get(sender)
        if not queue:
            raise ERRORS.ProtocolError('Vehicle {} expected a {} message from {}'.format(recipient, kind, sender))
        message = queue.popleft()
        if message.kind != kind:
            raise ERRORS.ProtocolError('Vehicle {} expected {} from {}, got {}'.format(recipient, kind, sender, message.kind))
        return message


    def export_trace(self, path):
        with open(path, 'w') as fp:
            for record in self.trace:
                fp.write(json.dumps(record, sort_keys=True) + '\n')


def weight_correction(utility, average_utility, alpha):
    """Fairness correction added to a bid

    Parameters
    ----------
    utility : float
        Cumulative utility of the bidder
    average_utility : float
        Mean cumulative utility of the bidding group
    alpha : float
        Tuning constant. Negative values favor vehicles with a low utility history

    Returns
    -------
    correction : float
        alpha * (utility - average_utility)
    """

    return alpha * (utility - average_utility)


def reservation_value(requests, now):
    """Value of staying idle, below the value of any feasible assignment

    Parameters
    ----------
    requests : list of RequestRecord
        Requests on offer
    now : int
        Auction time

    Returns
    -------
    value : float
        -M with M = 1 + the largest feasible sigma of any offered request
    """

    bound = max([max(0, request.t_req + request.t_star + request.delta_max - now) for request in requests], default=0)
    return -float(1 + bound)


def compute_bid(vehicle_id, feasible_plans, prices, epsilon, reservation=None, round_index=0):
    """Best request and bid value of one vehicle

    The net value of request j is -sigma_j - p_j. The bid is p_j + value_j - value_k + epsilon,
    k being the runner-up. With a reservation value, staying idle competes as the runner-up and
    the vehicle abstains when idle beats every request. Without it a single feasible request
    is bid at p_j + epsilon.

    Parameters
    ----------
    vehicle_id : int
        Bidding vehicle
    feasible_plans : dict
        Map request id -> feasible plan with a sigma attribute
    prices : dict
        Local price table, missing requests priced 0
    epsilon : float
        Minimal bid increment, > 0
    reservation : float
        Value of staying idle, None to disable the idle option
    round_index : int
        Round number stored in the bid

    Returns
    -------
    choice : tuple
        (request id, Bid), None if the vehicle abstains
    """

    if not feasible_plans:
        return None
    values = [(-plan.sigma - prices.get(request_id, 0.0), request_id) for request_id, plan in feasible_plans.items()]
    values.sort(key=lambda item: (-item[0], item[1]))
    best_value, best_request = values[0]
    if reservation is not None and best_value < reservation:
        return None
    price = prices.get(best_request, 0.0)
    if len(values) > 1:
        runner_up = values[1][0]
        if reservation is not None:
            runner_up = max(runner_up, reservation)
        value = price + best_value - runner_up + epsilon
    elif reservation is not None:
        value = price + best_value - reservation + epsilon
    else:
        value = price + epsilon
    return best_request, Bid(vehicle_id, best_request, value, round_index)


class AuctionAgent:
    """One vehicle taking part in the auction

    The agent only knows its own plans, utility history and local prices. Everything it learns
    about other agents arrives through the bus.

    Attributes
    ----------
    vehicle_id : int
        Vehicle id
    utility : float
        Cumulative utility U_v
    plans : dict
        Map request id -> feasible ServicePlan of this vehicle
    prices : dict
        Local price table
    holding : int
        Request currently won, None if none
    standing_bid : float
        Bid that won the held request

    Methods
    -------
    announce()
        Phase I, broadcast of the preferred request
    share_utility()
        Phase II, utility exchange inside the bidding group
    share_bid()
        Phase III, bid exchange inside the bidding group
    resolve()
        Winner determination and price update
    """

    def __init__(self, vehicle_id, utility, plans, bus, epsilon, alpha=0.0, reservation=None, price_init='min-sigma'):
        """Constructor for AuctionAgent
        """

        if price_init not in PRICE_INIT_STRATEGIES:
            raise ERRORS.ConfigError('Unknown price initialization {}'.format(price_init))
        self.vehicle_id     = vehicle_id
        self.utility        = float(utility)
        self.plans          = dict(plans)
        self.bus            = bus
        self.epsilon        = epsilon
        self.alpha          = alpha
        self.reservation    = reservation
        start = 0.0
        if price_init == 'min-sigma' and self.plans:
            start = -float(min(plan.sigma for plan in self.plans.values()))
        self.prices         = {request_id: start for request_id in self.plans}
        self.holding        = None
        self.standing_bid   = None
        self.price_history  = {request_id: [start] for request_id in self.plans}
        self._bid           = None
        self._preferred     = None
        self._group         = []


    @property
    def others(self):
        return [vehicle for vehicle in self.bus.participants if vehicle != self.vehicle_id]


    def announce(self, round_index):
        """Phase I, broadcast of the preferred request

        Parameters
        ----------
        round_index : int
            Current round

        Returns
        -------
        bidding : bool
            True if the agent placed a new bid this round
        """

        self._bid = None
        if self.holding is not None:
            self._preferred = self.holding
        else:
            choice = compute_bid(self.vehicle_id, self.plans, self.prices, self.epsilon, self.reservation, round_index)
            self._preferred = None if choice is None else choice[0]
            if choice is not None:
                self._bid = choice[1]
        payload = {'request_id': self._preferred, 'holding': self.holding is not None}
        self.bus.broadcast(AuctionMessage('preferred-request', self.vehicle_id, payload, round_index))
        return self._bid is not None


    def share_utility(self, round_index):
        """Phase II, reads every announcement, forms the bidding group and sends U_v inside it

        Returns
        -------
        any_bidder : bool
            True if some agent placed a new bid this round
        """

        any_bidder = self._bid is not None
        self._group = [self.vehicle_id]
        for other in self.others:
            payload = self.bus.recv(self.vehicle_id, other, 'preferred-request').payload
            if payload['request_id'] is not None and not payload['holding']:
                any_bidder = True
            if self._preferred is not None and payload['request_id'] == self._preferred:
                self._group.append(other)
        self._group.sort()
        if self._preferred is not None:
            message = AuctionMessage('utility-history', self.vehicle_id, self.utility, round_index)
            self.bus.send(message, self._group)
        return any_bidder


    def share_bid(self, round_index):
        """Phase III, applies the weight correction and sends the bid inside the group
        """

        if self._preferred is None:
            return
        utilities = [self.utility]
        for other in self._group:
            if other != self.vehicle_id:
                utilities.append(self.bus.recv(self.vehicle_id, other, 'utility-history').payload)
        average = sum(utilities) / len(utilities)
        if self._bid is not None:
            corrected = self._bid.value + weight_correction(self.utility, average, self.alpha)
            self._bid = Bid(self.vehicle_id, self._preferred, corrected, round_index)
        else:
            self._bid = Bid(self.vehicle_id, self._preferred, self.standing_bid, round_index)
        self.bus.send(AuctionMessage('bid', self.vehicle_id, self._bid, round_index), self._group)


    def resolve(self, round_index):
        """Winner determination inside the group and local price update

        Returns
        -------
        winner : Bid
            Winning bid of the group, None if the agent was in no group
        """

        if self._preferred is None:
            return None
        bids = [self._bid]
        for other in self._group:
            if other != self.vehicle_id:
                bids.append(self.bus.recv(self.vehicle_id, other, 'bid').payload)
        winner = min(bids, key=lambda bid: (-bid.value, bid.vehicle_id))
        request_id = self._preferred
        self.prices[request_id] = max(self.prices.get(request_id, 0.0), winner.value)
        self.price_history.setdefault(request_id, []).append(self.prices[request_id])
        if winner.vehicle_id == self.vehicle_id:
            if self.holding is None:
                self.holding = request_id
                self.standing_bid = winner.value
        elif self.holding == request_id:
            self.holding = None
            self.standing_bid = None
        return winner


@dataclass
class AuctionOutcome:
    """Assignment reached by the auction

    Attributes
    ----------
    assignment : dict
        Map request id -> vehicle id, None for unassigned requests
    plans : dict
        Map request id -> winning ServicePlan
    rounds : int
        Rounds run
    round_limit_reached : bool
        True if the auction was stopped by max_rounds
    prices : dict
        Map request id -> final winning bid
    """

    assignment: dict
    plans: dict
    rounds: int = 0
    round_limit_reached: bool = False
    prices: dict = field(default_factory=dict)


def build_agents(network, vehicles, requests, now, bus, epsilon, alpha=0.0, reservation=None, price_init='min-sigma'):
    """Creates one agent per vehicle, each planning only for its own vehicle

    Parameters
    ----------
    network : RoadNetwork
        Road network
    vehicles : list of VehicleState
        Vehicles taking part
    requests : list of RequestRecord
        Requests on offer
    now : int
        Auction time

    Returns
    -------
    agents : list of AuctionAgent
        Agents in vehicle id order
    """

    agents = []
    for vehicle in sorted(vehicles, key=lambda vehicle: vehicle.id):
        plans = {}
        for request in requests:
            plan = PLANNER.evaluate_service_plan(network, vehicle, request, now)
            if plan is not None:
                plans[request.id] = plan
        agents.append(AuctionAgent(vehicle.id, vehicle.utility, plans, bus, epsilon, alpha, reservation, price_init))
    return agents


def _auction_state(agents):
    return [(agent.holding, dict(agent.prices)) for agent in agents]


def run_auction(agents, request_ids, max_rounds=None):
    """Runs the auction among agents until the assignment settles

    The loop ends after a round without new bids, or after a round that leaves every holder
    and every local price unchanged. With alpha = 0 a bidder always raises its own price, so
    the second rule only ends rounds where weight corrected bids keep losing to a holder.

    Agents act in vehicle id order within each phase, the bus being flushed between phases.

    Parameters
    ----------
    agents : list of AuctionAgent
        Participants, sharing one MessageBus
    request_ids : list of int
        Requests on offer
    max_rounds : int
        Round cap, 50 per request if None

    Returns
    -------
    outcome : AuctionOutcome
        Final assignment with the winning plans
    """

    agents = sorted(agents, key=lambda agent: agent.vehicle_id)
    if max_rounds is None:
        max_rounds = max(1, 50 * len(request_ids))
    outcome = AuctionOutcome({request_id: None for request_id in request_ids}, {})
    if not agents or not request_ids:
        return outcome
    bus = agents[0].bus
    rounds = 0
    while rounds < max_rounds:
        for agent in agents:
            agent.announce(rounds)
        bus.flush()
        any_bidder = False
        for agent in agents:
            any_bidder = agent.share_utility(rounds) or any_bidder
        bus.flush()
        if not any_bidder:
            break
        for agent in agents:
            agent.share_bid(rounds)
        bus.flush()
        before = _auction_state(agents)
        for agent in agents:
            agent.resolve(rounds)
        rounds += 1
        if _auction_state(agents) == before:
            LOGGER.write('Auction settled after round {} without holder or price changes'.format(rounds))
            break
    else:
        outcome.round_limit_reached = True
        LOGGER.write('Auction stopped at the round limit of {}'.format(max_rounds))

    outcome.rounds = rounds
    for agent in agents:
        if agent.holding is not None:
            outcome.assignment[agent.holding] = agent.vehicle_id
            outcome.plans[agent.holding] = agent.plans[agent.holding]
            outcome.prices[agent.holding] = agent.standing_bid
    LOGGER.write('Auction of {} requests among {} vehicles finished after {} rounds, {} assigned'.format(
        len(request_ids), len(agents), rounds, len(outcome.plans)))
    return outcome
