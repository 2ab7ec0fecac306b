"""Road network model, map documents, shortest paths and synthetic map generation

The road network is a weighted transition system: a directed graph whose edge weights are
travel times in whole seconds and whose nodes carry a set of propositions, a request arrival
probability and an average request utility. Networks are immutable once loaded.

Classes
-------
RoadNetwork
    Frozen networkx graph wrapper with per-node request statistics

Functions
---------
load_network()
    Validates a map document and builds a RoadNetwork
read_network_file()
    Loads a map document from a JSON file
network_to_document()
    Serializes a network back into a map document
shortest_travel_time()
    Minimal travel time between two nodes
shortest_route()
    Deterministic minimal travel time route between two nodes
lexicographic_shortest_path()
    Dijkstra search over any implicit graph, ties broken by node id sequence
neighbor_rings()
    Breadth-first hop rings around a node
nodes_within()
    Nodes within a hop radius, ignoring edge direction
make_probability_map()
    Synthetic request arrival probabilities
make_grid_network()
    Bidirectional grid map generator
"""

import re
import heapq
import functools

import numpy as np
import networkx as nx

import pyfairmod.errors as ERRORS
import pyfairmod.logger as LOGGER
import pyfairmod.scltl as SCLTL


PROBABILITY_MAP_KINDS = ['uniform', 'center', 'corner', 'two_peaks']

# Fixed seed for sampling the requests that estimate missing average request utilities
AVG_UTILITY_SEED = 0


@functools.lru_cache(maxsize=None)
def node_sort_key(node):
    """Natural sort key for node ids, so that n2 sorts before n10. Computed once per id

    Parameters
    ----------
    node : str
        Node id

    Returns
    -------
    key : tuple
        Alternating text and integer chunks, then the raw id so that distinct ids never tie
    """

    parts = re.split(r'(\d+)', str(node))
    return (tuple(int(part) if i % 2 == 1 else part for i, part in enumerate(parts)), str(node))


class RoadNetwork:
    """Immutable weighted transition system of the road network

    Attributes
    ----------
    graph : networkx.DiGraph
        Frozen graph. Edges carry 'weight', nodes carry 'labels', 'arrival_prob' and 'avg_request_utility'
    alphabet : frozenset of str
        Declared propositions
    nodes : list of str
        Node ids in natural sort order
    product_routes : dict
        Cache of product automaton searches, filled by planner.plan_route()

    Methods
    -------
    labels()
        Propositions true at a node
    successors()
        Outgoing (node, weight) pairs of a node in node order
    node_rank()
        Position of a node in natural sort order
    weight()
        Travel time of an edge
    arrival_prob()
        Request arrival probability of a node
    avg_request_utility()
        Average request utility of a node
    travel_times_from()
        Cached single source travel times
    location_proposition()
        First label of a node, its own location proposition
    district_proposition()
        Second label of a node if any, else its location proposition
    """

    def __init__(self, graph, alphabet):
        """Constructor for RoadNetwork
        """

        self.graph      = nx.freeze(graph)
        self.alphabet   = frozenset(alphabet)
        self.nodes      = sorted(graph.nodes, key=node_sort_key)
        self._labels    = {node: frozenset(graph.nodes[node]['labels']) for node in self.nodes}
        self._rank      = {node: index for index, node in enumerate(self.nodes)}
        self._successors = {}
        for node in self.nodes:
            out_edges = [(target, graph.edges[node, target]['weight']) for target in graph.successors(node)]
            self._successors[node] = sorted(out_edges, key=lambda edge: node_sort_key(edge[0]))
        self._travel_times = {}
        self.product_routes = {}


    def __len__(self):
        return len(self.nodes)


    def __contains__(self, node):
        return node in self._labels


    def labels(self, node):
        return self._labels[node]


    def successors(self, node):
        return self._successors[node]


    def node_rank(self, node):
        return self._rank[node]


    def weight(self, source, target):
        return self.graph.edges[source, target]['weight']


    def arrival_prob(self, node):
        return self.graph.nodes[node]['arrival_prob']


    def avg_request_utility(self, node):
        return self.graph.nodes[node]['avg_request_utility']


    def location_proposition(self, node):
        return self.graph.nodes[node]['labels'][0]


    def district_proposition(self, node):
        labels = self.graph.nodes[node]['labels']
        return labels[1] if len(labels) > 1 else labels[0]


    def travel_times_from(self, source):
        """Single source minimal travel times, computed once per source

        Parameters
        ----------
        source : str
            Start node

        Returns
        -------
        times : dict
            Map reachable node -> minimal travel time in seconds
        """

        if source not in self._travel_times:
            self._travel_times[source] = nx.single_source_dijkstra_path_length(self.graph, source, weight='weight')
        return self._travel_times[source]


    def copy_with(self, arrival_prob=None, avg_request_utility=None):
        """Builds a new network with replaced per-node statistics

        Parameters
        ----------
        arrival_prob : dict
            Map node -> probability, or None to keep the current values
        avg_request_utility : dict
            Map node -> utility, or None to keep the current values

        Returns
        -------
        network : RoadNetwork
            Updated copy
        """

        graph = nx.DiGraph(self.graph)
        for node in self.nodes:
            if arrival_prob is not None:
                graph.nodes[node]['arrival_prob'] = float(arrival_prob[node])
            if avg_request_utility is not None:
                graph.nodes[node]['avg_request_utility'] = float(avg_request_utility[node])
        return RoadNetwork(graph, self.alphabet)


#--------------------------------
# Map documents
#--------------------------------


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def load_network(document, estimate_utility=True):
    """Validates a map document and builds the network it describes

    Nodes without 'arrival_prob' get the uniform probability when no node declares one, and 0
    otherwise. Nodes without 'avg_request_utility' get the network-wide mean optimal
    satisfaction time of sampled pattern requests.

    Parameters
    ----------
    document : dict
        Map document with 'nodes', 'edges' and 'alphabet'
    estimate_utility : bool
        If False, missing average request utilities are set to 0

    Returns
    -------
    network : RoadNetwork
        The validated network

    Raises
    ------
    MapSchemaError
        Missing or mistyped fields, duplicate ids, labels outside the alphabet or unusable as propositions
    NonPositiveWeightError
        Edge weight below 1
    ProbabilityRangeError
        Arrival probability outside [0, 1]
    DanglingEndpointError
        Edge endpoint that is not a declared node
    """

    if not isinstance(document, dict):
        raise ERRORS.MapSchemaError('Map document must be an object')
    for field in ['nodes', 'edges']:
        if not isinstance(document.get(field), list):
            raise ERRORS.MapSchemaError('Map document field {} must be a list'.format(field))

    graph = nx.DiGraph()
    used_props = set()
    for entry in document['nodes']:
        if not isinstance(entry, dict) or not isinstance(entry.get('id'), str):
            raise ERRORS.MapSchemaError('Every node needs a string id, got {}'.format(entry))
        node = entry['id']
        if node in graph:
            raise ERRORS.MapSchemaError('Duplicate node id {}'.format(node))
        labels = entry.get('labels', [node])
        if not isinstance(labels, list) or len(labels) == 0 or not all(isinstance(label, str) for label in labels):
            raise ERRORS.MapSchemaError('Node {} needs a non-empty list of string labels'.format(node))
        invalid = [label for label in labels if not SCLTL.is_valid_proposition(label)]
        if invalid:
            raise ERRORS.MapSchemaError('Node {} has labels {} that cannot be used as propositions'.format(node, invalid))
        attributes = {'labels': list(labels)}
        for field in ['arrival_prob', 'avg_request_utility']:
            if field in entry:
                if not _is_number(entry[field]):
                    raise ERRORS.MapSchemaError('Node {} field {} must be a number'.format(node, field))
                attributes[field] = float(entry[field])
        if 'arrival_prob' in attributes and not 0.0 <= attributes['arrival_prob'] <= 1.0:
            raise ERRORS.ProbabilityRangeError('Node {} has arrival probability {} outside [0, 1]'.format(node, attributes['arrival_prob']))
        if attributes.get('avg_request_utility', 0.0) < 0:
            raise ERRORS.MapSchemaError('Node {} has a negative average request utility'.format(node))
        used_props.update(labels)
        graph.add_node(node, **attributes)

    if len(graph) == 0:
        raise ERRORS.MapSchemaError('Map document declares no nodes')

    if 'alphabet' not in document:
        raise ERRORS.MapSchemaError('Map document needs an alphabet')
    alphabet = document['alphabet']
    if not isinstance(alphabet, list) or not all(isinstance(name, str) for name in alphabet):
        raise ERRORS.MapSchemaError('Map document field alphabet must be a list of strings')
    if len(set(alphabet)) != len(alphabet):
        raise ERRORS.MapSchemaError('Alphabet contains duplicate propositions')
    unknown = used_props - set(alphabet)
    if unknown:
        raise ERRORS.MapSchemaError('Labels {} are not in the alphabet'.format(sorted(unknown)))

    for entry in document['edges']:
        if not isinstance(entry, dict) or not all(field in entry for field in ['from', 'to', 'weight']):
            raise ERRORS.MapSchemaError('Every edge needs from, to and weight, got {}'.format(entry))
        source, target, weight = entry['from'], entry['to'], entry['weight']
        for endpoint in [source, target]:
            if endpoint not in graph:
                raise ERRORS.DanglingEndpointError('Edge endpoint {} is not a declared node'.format(endpoint))
        if not _is_number(weight) or int(weight) != weight:
            raise ERRORS.MapSchemaError('Edge {} -> {} weight must be an integer'.format(source, target))
        if weight < 1:
            raise ERRORS.NonPositiveWeightError('Edge {} -> {} has weight {}'.format(source, target, weight))
        graph.add_edge(source, target, weight=int(weight))

    declared = [node for node in graph.nodes if 'arrival_prob' in graph.nodes[node]]
    for node in graph.nodes:
        if 'arrival_prob' not in graph.nodes[node]:
            graph.nodes[node]['arrival_prob'] = 0.0 if declared else 1.0 / len(graph)

    missing_utility = [node for node in graph.nodes if 'avg_request_utility' not in graph.nodes[node]]
    for node in missing_utility:
        graph.nodes[node]['avg_request_utility'] = 0.0
    network = RoadNetwork(graph, alphabet)
    LOGGER.write('Loaded network with {} nodes and {} edges'.format(len(network), network.graph.number_of_edges()))

    if missing_utility and estimate_utility:
        estimate = estimate_avg_request_utility(network)
        values = {node: network.avg_request_utility(node) for node in network.nodes}
        for node in missing_utility:
            values[node] = estimate
        network = network.copy_with(avg_request_utility=values)
    return network


def read_network_file(path, estimate_utility=True):
    """Loads a map document from a JSON file

    Parameters
    ----------
    path : str
        Path to the map file

    Returns
    -------
    network : RoadNetwork
        The validated network
    """

    import pyfairmod.config_manager as CONFIG
    return load_network(CONFIG.read_network_document(path), estimate_utility=estimate_utility)


def network_to_document(network):
    """Serializes a network into a map document that load_network() reads back

    Parameters
    ----------
    network : RoadNetwork
        Network to serialize

    Returns
    -------
    document : dict
        Map document
    """

    nodes = []
    for node in network.nodes:
        nodes.append({
            'id': node,
            'labels': list(network.graph.nodes[node]['labels']),
            'arrival_prob': network.arrival_prob(node),
            'avg_request_utility': network.avg_request_utility(node),
        })
    edges = []
    for node in network.nodes:
        for target, weight in network.successors(node):
            edges.append({'from': node, 'to': target, 'weight': weight})
    return {'alphabet': sorted(network.alphabet), 'nodes': nodes, 'edges': edges}


def estimate_avg_request_utility(network, seed=AVG_UTILITY_SEED):
    """Network-wide mean optimal satisfaction time of sampled pattern requests

    One request per node and pattern is sampled with a fixed seed. Infeasible samples are skipped.

    Parameters
    ----------
    network : RoadNetwork
        Network to sample on
    seed : int
        Sampling seed

    Returns
    -------
    estimate : float
        Mean optimal satisfaction time in seconds, 0 if no sample was feasible
    """

    import pyfairmod.planner as PLANNER

    rng = np.random.default_rng(seed)
    times = []
    for node in network.nodes:
        for kind in SCLTL.PATTERN_ARITY:
            destinations = sample_destinations(network, node, kind, rng)
            if destinations is None:
                continue
            formula = SCLTL.instantiate_pattern(kind, network.location_proposition(node), destinations)
            dfa = SCLTL.translate_to_dfa(formula)
            try:
                times.append(PLANNER.satisfaction_time_from(network, node, dfa))
            except ERRORS.InfeasibleRequestError:
                continue
    estimate = float(np.mean(times)) if times else 0.0
    LOGGER.write('Estimated average request utility {:.2f} from {} samples'.format(estimate, len(times)))
    return estimate


def sample_destinations(network, pick, kind, rng):
    """Samples the destination propositions of a pattern request picked up at a node

    Destination nodes are drawn uniformly among nodes other than the pick-up node. seq2 uses
    two location propositions. alt-then uses two locations and the district of one of them,
    then-alt uses the district of one node, its location and a second location.

    Parameters
    ----------
    network : RoadNetwork
        Road network
    pick : str
        Pick-up node
    kind : str
        Pattern name
    rng : numpy.random.Generator
        Random source

    Returns
    -------
    destinations : list of str
        Destination propositions, None if the network has fewer than 3 nodes
    """

    others = [node for node in network.nodes if node != pick]
    if len(others) < 2:
        return None
    first, second = [others[i] for i in rng.choice(len(others), size=2, replace=False)]
    if kind == 'seq2':
        return [network.location_proposition(first), network.location_proposition(second)]
    if kind == 'alt-then':
        anchor = first if rng.integers(2) == 0 else second
        return [network.location_proposition(first), network.location_proposition(second),
                network.district_proposition(anchor)]
    return [network.district_proposition(first), network.location_proposition(first),
            network.location_proposition(second)]


#--------------------------------
# Shortest paths and neighborhoods
#--------------------------------


def shortest_travel_time(network, source, target):
    """Minimal travel time between two nodes

    Parameters
    ----------
    network : RoadNetwork
        Road network
    source, target : str
        Endpoints

    Returns
    -------
    travel_time : int
        Minimal sum of edge weights, 0 when source equals target, None if target is unreachable
    """

    return network.travel_times_from(source).get(target)


def lexicographic_shortest_path(starts, successors, is_goal, key=None, cutoff=None):
    """Dijkstra search returning the minimal (cost, key sequence) path to a goal state

    Every state is settled by the first heap entry popped for it. With positive weights the
    first goal popped is minimal in cost, ties broken by the lexicographic order of the keys
    along the path.

    Parameters
    ----------
    starts : list of state
        Start states, each with cost 0
    successors : callable
        Maps a state to a list of (next state, weight) pairs, weights >= 1
    is_goal : callable
        Goal test on states
    key : callable
        Maps a state to its sortable tie-break key, node_sort_key on the state if None
    cutoff : int
        Costs above cutoff are not explored

    Returns
    -------
    result : tuple
        (cost, list of states) of the best path, None if no goal is reachable
    """

    if key is None:
        key = node_sort_key
    heap = []
    for state in starts:
        heapq.heappush(heap, (0, (key(state),), (state,)))
    settled = set()
    while heap:
        cost, keys, path = heapq.heappop(heap)
        state = path[-1]
        if state in settled:
            continue
        settled.add(state)
        if is_goal(state):
            return cost, list(path)
        for next_state, weight in successors(state):
            next_cost = cost + weight
            if next_state in settled or (cutoff is not None and next_cost > cutoff):
                continue
            heapq.heappush(heap, (next_cost, keys + (key(next_state),), path + (next_state,)))
    return None


def shortest_route(network, source, target):
    """Deterministic minimal travel time route between two nodes

    Parameters
    ----------
    network : RoadNetwork
        Road network
    source, target : str
        Endpoints

    Returns
    -------
    route : list of str
        Nodes from source to target, None if target is unreachable
    """

    result = lexicographic_shortest_path([source], network.successors, lambda node: node == target,
                                         key=network.node_rank)
    if result is None:
        return None
    return result[1]


def neighbor_rings(network, center, k_w):
    """Breadth-first rings of nodes around a center, following edge direction

    Parameters
    ----------
    network : RoadNetwork
        Road network
    center : str
        Ring center, excluded from every ring
    k_w : int
        Number of rings

    Returns
    -------
    rings : list of set
        Ring i-1 holds the nodes at hop distance i, for i = 1..k_w
    """

    hops = nx.single_source_shortest_path_length(network.graph, center, cutoff=k_w)
    rings = [set() for _ in range(k_w)]
    for node, hop in hops.items():
        if hop >= 1:
            rings[hop - 1].add(node)
    return rings


def nodes_within(network, center, radius):
    """Nodes within a hop radius of a center, ignoring edge direction, center included

    Parameters
    ----------
    network : RoadNetwork
        Road network
    center : str
        Center node
    radius : int
        Hop radius

    Returns
    -------
    nodes : set of str
        Nearby nodes
    """

    return set(nx.single_source_shortest_path_length(network.graph.to_undirected(as_view=True), center, cutoff=radius))


#--------------------------------
# Synthetic maps
#--------------------------------


def _undirected_hops(network):
    return dict(nx.all_pairs_shortest_path_length(network.graph.to_undirected(as_view=True)))


def _peak_nodes(network, kind, hops):
    eccentricity = {node: max(hops[node].values()) for node in network.nodes}
    if kind == 'center':
        return [min(network.nodes, key=lambda node: eccentricity[node])]
    if kind == 'corner':
        return [max(network.nodes, key=lambda node: eccentricity[node])]
    best = None
    for i, first in enumerate(network.nodes):
        for second in network.nodes[i + 1:]:
            distance = hops[first].get(second)
            if distance is not None and (best is None or distance > best[0]):
                best = (distance, first, second)
    if best is None:
        return [network.nodes[0]]
    return [best[1], best[2]]


def make_probability_map(network, kind, peak_mass=0.5, spread=2):
    """Synthetic request arrival probabilities

    Peaked maps give every peak the mass peak_mass, spread over the nodes within `spread` hops
    with weight 0.5 per hop. The remaining mass is split evenly over all nodes. Peaks are the
    graph center, the most eccentric node, or the two most distant nodes, ties going to the
    lowest node id.

    Parameters
    ----------
    network : RoadNetwork
        Road network
    kind : str
        uniform, center, corner or two_peaks
    peak_mass : float
        Mass per peak in (0, 1], capped so that all peaks together hold at most 1
    spread : int
        Hop radius of each peak

    Returns
    -------
    probabilities : dict
        Map node -> probability, summing to 1
    """

    if kind not in PROBABILITY_MAP_KINDS:
        raise ERRORS.ConfigError('Unknown probability map kind {}'.format(kind))
    if not 0 < peak_mass <= 1:
        raise ERRORS.ConfigError('Peak mass must be in (0, 1], got {}'.format(peak_mass))
    if spread < 1:
        raise ERRORS.ConfigError('Peak spread must be at least 1, got {}'.format(spread))
    n = len(network)
    if kind == 'uniform':
        return {node: 1.0 / n for node in network.nodes}

    hops = _undirected_hops(network)
    peaks = _peak_nodes(network, kind, hops)
    peak_mass = min(peak_mass, 1.0 / len(peaks))
    probabilities = np.full(n, (1.0 - len(peaks) * peak_mass) / n)
    index = {node: i for i, node in enumerate(network.nodes)}
    for peak in peaks:
        weights = np.zeros(n)
        for node, hop in hops[peak].items():
            if hop <= spread:
                weights[index[node]] = 0.5 ** hop
        probabilities += peak_mass * weights / weights.sum()
    return {node: float(probabilities[index[node]]) for node in network.nodes}


def make_grid_network(rows, cols, min_weight=1, max_weight=1, seed=0, estimate_utility=True):
    """Bidirectional grid map with uniform arrival probabilities

    Node n{i} sits at row i // cols and column i % cols. Its labels are its own location
    proposition n{i} and a district proposition z{r}_{c} shared by each 2x2 block. Each edge
    direction draws its weight uniformly from [min_weight, max_weight].

    Parameters
    ----------
    rows, cols : int
        Grid dimensions
    min_weight, max_weight : int
        Travel time range in seconds
    seed : int
        Weight sampling seed

    Returns
    -------
    network : RoadNetwork
        The generated network
    """

    if rows < 1 or cols < 1:
        raise ERRORS.ConfigError('Grid dimensions must be positive, got {}x{}'.format(rows, cols))
    if min_weight < 1 or max_weight < min_weight:
        raise ERRORS.ConfigError('Invalid weight range [{}, {}]'.format(min_weight, max_weight))
    rng = np.random.default_rng(seed)
    nodes = []
    alphabet = set()
    for i in range(rows * cols):
        r, c = divmod(i, cols)
        labels = ['n{}'.format(i), 'z{}_{}'.format(r // 2, c // 2)]
        alphabet.update(labels)
        nodes.append({'id': 'n{}'.format(i), 'labels': labels})
    edges = []
    for i in range(rows * cols):
        r, c = divmod(i, cols)
        neighbors = []
        if c + 1 < cols:
            neighbors.append(i + 1)
        if r + 1 < rows:
            neighbors.append(i + cols)
        for j in neighbors:
            for source, target in [(i, j), (j, i)]:
                weight = int(rng.integers(min_weight, max_weight + 1))
                edges.append({'from': 'n{}'.format(source), 'to': 'n{}'.format(target), 'weight': weight})
    document = {'alphabet': sorted(alphabet, key=node_sort_key), 'nodes': nodes, 'edges': edges}
    return load_network(document, estimate_utility=estimate_utility)
