import pytest

import numpy as np

import pyfairmod.errors as ERRORS
import pyfairmod.network as NETWORK
import tests.helper_test_funcs as HELPER


def test_load_line_network():
    network = HELPER.line_network([2, 3])
    assert len(network) == 3
    assert network.graph.number_of_edges() == 2
    assert network.weight('s0', 's1') == 2
    assert network.labels('s1') == frozenset(['s1'])
    assert network.alphabet == frozenset(['s0', 's1', 's2'])


def test_missing_arrival_probabilities_are_uniform():
    network = HELPER.line_network([1, 1, 1])
    assert all(network.arrival_prob(node) == 0.25 for node in network.nodes)


def test_declared_arrival_probability_zeroes_the_rest():
    document = HELPER.line_document([1, 1])
    document['nodes'][1]['arrival_prob'] = 1.0
    network = NETWORK.load_network(document, estimate_utility=False)
    assert network.arrival_prob('s1') == 1.0
    assert network.arrival_prob('s0') == 0.0


def test_zero_weight_rejected():
    with pytest.raises(ERRORS.NonPositiveWeightError):
        NETWORK.load_network(HELPER.line_document([2, 0]), estimate_utility=False)


def test_dangling_endpoint_rejected():
    document = HELPER.line_document([2])
    document['edges'].append({'from': 's1', 'to': 'nowhere', 'weight': 1})
    with pytest.raises(ERRORS.DanglingEndpointError):
        NETWORK.load_network(document, estimate_utility=False)


def test_probability_range_rejected():
    document = HELPER.line_document([2])
    document['nodes'][0]['arrival_prob'] = 1.5
    with pytest.raises(ERRORS.ProbabilityRangeError):
        NETWORK.load_network(document, estimate_utility=False)


def test_schema_errors():
    with pytest.raises(ERRORS.MapSchemaError):
        NETWORK.load_network({'nodes': []}, estimate_utility=False)
    document = HELPER.line_document([2], labels=[['a'], ['b']])
    document['alphabet'] = ['a']
    with pytest.raises(ERRORS.MapSchemaError):
        NETWORK.load_network(document, estimate_utility=False)
    document = HELPER.line_document([2])
    document['nodes'].append({'id': 's0'})
    with pytest.raises(ERRORS.MapSchemaError):
        NETWORK.load_network(document, estimate_utility=False)
    document = HELPER.line_document([2], labels=[['a'], ['two words']])
    with pytest.raises(ERRORS.MapSchemaError):
        NETWORK.load_network(document, estimate_utility=False)
    document = HELPER.line_document([2], labels=[['a'], ['U']])
    with pytest.raises(ERRORS.MapSchemaError):
        NETWORK.load_network(document, estimate_utility=False)



def test_missing_alphabet_rejected():
    document = HELPER.line_document([2])
    del document['alphabet']
    with pytest.raises(ERRORS.MapSchemaError):
        NETWORK.load_network(document, estimate_utility=False)


def test_document_round_trip_keeps_statistics():
    network = NETWORK.make_grid_network(2, 3, min_weight=1, max_weight=4, seed=3)
    again = NETWORK.load_network(NETWORK.network_to_document(network))
    assert again.nodes == network.nodes
    for node in network.nodes:
        assert again.successors(node) == network.successors(node)
        assert again.avg_request_utility(node) == network.avg_request_utility(node)


def test_shortest_travel_time():
    network = HELPER.line_network([2, 3])
    assert NETWORK.shortest_travel_time(network, 's0', 's2') == 5
    assert NETWORK.shortest_travel_time(network, 's1', 's1') == 0
    assert NETWORK.shortest_travel_time(network, 's2', 's0') is None


def test_natural_node_order_is_cached():
    assert NETWORK.node_sort_key('n2') < NETWORK.node_sort_key('n10')
    assert NETWORK.node_sort_key('n10') is NETWORK.node_sort_key('n10')
    network = NETWORK.make_grid_network(3, 4, estimate_utility=False)
    assert network.nodes[:3] == ['n0', 'n1', 'n2']
    assert network.nodes[-1] == 'n11'
    assert [network.node_rank(node) for node in network.nodes] == list(range(12))


def test_shortest_route_prefers_lower_ids_on_ties():
    document = {'alphabet': ['a', 'b', 'c', 'd'], 'nodes': [{'id': node} for node in ['a', 'b', 'c', 'd']],
                'edges': [{'from': 'a', 'to': 'c', 'weight': 1}, {'from': 'a', 'to': 'b', 'weight': 1},
                          {'from': 'c', 'to': 'd', 'weight': 1}, {'from': 'b', 'to': 'd', 'weight': 1}]}
    network = NETWORK.load_network(document, estimate_utility=False)
    assert HELPER.compare_lists(['a', 'b', 'd'], NETWORK.shortest_route(network, 'a', 'd'))
    assert NETWORK.shortest_route(network, 'd', 'a') is None


def test_triangle_inequality():
    rng = HELPER.seeded_rng(7)
    for _ in range(10):
        network = HELPER.random_network(rng, 6)
        for u in network.nodes:
            for v in network.nodes:
                for w in network.nodes:
                    uv = NETWORK.shortest_travel_time(network, u, v)
                    vw = NETWORK.shortest_travel_time(network, v, w)
                    uw = NETWORK.shortest_travel_time(network, u, w)
                    if uv is not None and vw is not None:
                        assert uw is not None and uw <= uv + vw


def test_neighbor_rings_on_line():
    network = HELPER.line_network([1, 1, 1])
    rings = NETWORK.neighbor_rings(network, 's0', 2)
    assert rings == [{'s1'}, {'s2'}]


def test_neighbor_rings_isolated_node():
    network = NETWORK.load_network({'alphabet': ['x'], 'nodes': [{'id': 'x'}], 'edges': []}, estimate_utility=False)
    assert NETWORK.neighbor_rings(network, 'x', 3) == [set(), set(), set()]


def test_neighbor_rings_on_grid():
    network = NETWORK.make_grid_network(2, 2, estimate_utility=False)
    rings = NETWORK.neighbor_rings(network, 'n0', 2)
    assert rings == [{'n1', 'n2'}, {'n3'}]


def test_neighbor_rings_match_frontier_expansion():
    rng = HELPER.seeded_rng(11)
    for _ in range(10):
        network = HELPER.random_network(rng, 7, edge_prob=0.25)
        center = network.nodes[0]
        hops = HELPER.brute_force_hops(network, center)
        rings = NETWORK.neighbor_rings(network, center, 3)
        for i, ring in enumerate(rings):
            assert ring == {node for node, hop in hops.items() if hop == i + 1}


def test_nodes_within_ignores_direction():
    network = HELPER.line_network([1, 1, 1])
    assert NETWORK.nodes_within(network, 's2', 1) == {'s1', 's2', 's3'}


def test_uniform_probability_map():
    network = NETWORK.make_grid_network(2, 2, estimate_utility=False)
    probabilities = NETWORK.make_probability_map(network, 'uniform')
    assert all(value == 0.25 for value in probabilities.values())


def test_center_probability_map_single_node():
    network = NETWORK.load_network({'alphabet': ['x'], 'nodes': [{'id': 'x'}], 'edges': []}, estimate_utility=False)
    assert NETWORK.make_probability_map(network, 'center') == {'x': 1.0}


def test_two_peaks_probability_map():
    network = HELPER.line_network([1, 1, 1, 1, 1], one_way=False)
    probabilities = NETWORK.make_probability_map(network, 'two_peaks', peak_mass=0.3, spread=1)
    base = 0.4 / 6
    assert probabilities['s0'] == pytest.approx(base + 0.2)
    assert probabilities['s5'] == pytest.approx(base + 0.2)
    assert probabilities['s1'] == pytest.approx(base + 0.1)
    assert probabilities['s4'] == pytest.approx(base + 0.1)
    assert probabilities['s2'] == pytest.approx(base)
    assert sum(probabilities.values()) == pytest.approx(1.0)


@pytest.mark.parametrize('kind', NETWORK.PROBABILITY_MAP_KINDS)
def test_probability_maps_are_normalized(kind):
    network = NETWORK.make_grid_network(4, 5, estimate_utility=False)
    probabilities = NETWORK.make_probability_map(network, kind)
    values = np.array(list(probabilities.values()))
    assert values.min() >= 0
    assert values.sum() == pytest.approx(1.0)


def test_probability_map_errors():
    network = NETWORK.make_grid_network(2, 2, estimate_utility=False)
    with pytest.raises(ERRORS.ConfigError):
        NETWORK.make_probability_map(network, 'ring')
    with pytest.raises(ERRORS.ConfigError):
        NETWORK.make_probability_map(network, 'center', peak_mass=0)


def test_grid_labels_and_districts():
    network = NETWORK.make_grid_network(3, 4, estimate_utility=False)
    assert network.location_proposition('n6') == 'n6'
    assert network.district_proposition('n6') == 'z0_1'
    assert network.district_proposition('n11') == 'z1_1'
    assert network.weight('n0', 'n1') == 1 and network.weight('n1', 'n0') == 1


def test_estimated_utility_is_positive():
    network = NETWORK.make_grid_network(3, 3)
    assert network.avg_request_utility('n0') > 0
    assert len({network.avg_request_utility(node) for node in network.nodes}) == 1
