import pytest

import pyfairmod.errors as ERRORS
import pyfairmod.network as NETWORK
import pyfairmod.rebalance as REBALANCE
import tests.helper_test_funcs as HELPER


def _line(probabilities, utility=10.0):
    document = HELPER.line_document([1] * (len(probabilities) - 1), one_way=False)
    for node, probability in zip(document['nodes'], probabilities):
        node['arrival_prob'] = probability
        node['avg_request_utility'] = utility
    return NETWORK.load_network(document)


def _reference_target(network, position, k_w, k_a):
    target, best = position, REBALANCE.potential_utility(network, position, 0)
    for ring in NETWORK.neighbor_rings(network, position, k_w):
        ring_best = None
        for node in sorted(ring, key=NETWORK.node_sort_key):
            value = REBALANCE.potential_utility(network, node, 0)
            if ring_best is None or value > ring_best[1]:
                ring_best = (node, value)
        if ring_best is None:
            continue
        if best == 0:
            if ring_best[1] > 0:
                target, best = ring_best
        elif ring_best[1] >= k_a * best:
            target, best = ring_best
    return target


def test_potential_utility():
    network = NETWORK.load_network({'alphabet': ['x'], 'nodes': [{'id': 'x', 'arrival_prob': 0.2, 'avg_request_utility': 12}], 'edges': []})
    assert REBALANCE.potential_utility(network, 'x', 1) == pytest.approx(1.2)
    assert REBALANCE.potential_utility(network, 'x', 0) == pytest.approx(2.4)
    empty = NETWORK.load_network({'alphabet': ['x'], 'nodes': [{'id': 'x', 'arrival_prob': 0.0, 'avg_request_utility': 12}], 'edges': []})
    assert REBALANCE.potential_utility(empty, 'x', 0) == 0


def test_idle_counts():
    network = _line([0.2] * 5)
    counts = REBALANCE.idle_counts(network, ['s0', 's1'], radius=1)
    assert counts == {'s0': 2, 's1': 2, 's2': 1}


def test_zero_potentials_stay():
    network = _line([0.0, 0.0, 0.0])
    decision = REBALANCE.find_rebalance_target(network, HELPER.make_vehicle(0, 's1'))
    assert decision.stays
    assert decision.target == 's1'
    assert decision.route == ('s1',)


def test_small_improvement_stays():
    network = _line([0.1, 0.15, 0.0])
    decision = REBALANCE.find_rebalance_target(network, HELPER.make_vehicle(0, 's0'), k_w=2, k_a=2)
    assert decision.stays
    assert decision.potential == pytest.approx(1.0)


def test_ring_scan_keeps_first_accepted_ring():
    network = _line([0.1, 0.25, 0.4])
    decision = REBALANCE.find_rebalance_target(network, HELPER.make_vehicle(0, 's0'), k_w=2, k_a=2)
    assert decision.target == 's1'
    assert decision.potential == pytest.approx(2.5)
    assert decision.route == ('s0', 's1')


def test_zero_potential_moves_to_any_positive_node():
    network = _line([0.0, 0.0, 0.0, 0.01])
    decision = REBALANCE.find_rebalance_target(network, HELPER.make_vehicle(0, 's0'), k_w=3, k_a=1.0001)
    assert decision.target == 's3'
    assert decision.route == ('s0', 's1', 's2', 's3')


def test_ring_ties_go_to_lowest_id():
    network = _line([0.3, 0.0, 0.3])
    decision = REBALANCE.find_rebalance_target(network, HELPER.make_vehicle(0, 's1'), k_w=1)
    assert decision.target == 's0'


def test_invalid_factor():
    with pytest.raises(ERRORS.ConfigError):
        REBALANCE.find_rebalance_target(_line([0.5, 0.5]), HELPER.make_vehicle(0, 's0'), k_a=1.0)


def test_targets_match_reference_loop():
    rng = HELPER.seeded_rng(31)
    for _ in range(30):
        network = HELPER.random_network(rng, 8, edge_prob=0.3)
        probabilities = {node: float(rng.uniform(0, 1)) for node in network.nodes}
        utilities = {node: float(rng.uniform(0, 20)) for node in network.nodes}
        network = network.copy_with(arrival_prob=probabilities, avg_request_utility=utilities)
        for position in network.nodes:
            decision = REBALANCE.find_rebalance_target(network, HELPER.make_vehicle(0, position), k_w=3, k_a=1.3)
            assert decision.target == _reference_target(network, position, 3, 1.3)
            current = REBALANCE.potential_utility(network, position, 0)
            if decision.stays:
                assert decision.potential == current
            else:
                assert decision.potential > current
                assert decision.route[0] == position and decision.route[-1] == decision.target


def test_no_vacant_vehicles():
    assert REBALANCE.run_rebalancing(_line([0.5, 0.5]), []) == {}


def test_second_vehicle_avoids_claimed_target():
    network = _line([0.1, 0.0, 0.6, 0.0, 0.3])
    first, second = HELPER.make_vehicle(0, 's0'), HELPER.make_vehicle(1, 's4')
    decisions = REBALANCE.run_rebalancing(network, [second, first], k_w=2, k_a=1.5, radius=1)
    assert decisions[0].target == 's2'
    assert decisions[1].stays
    alone = REBALANCE.run_rebalancing(network, [second], k_w=2, k_a=1.5, radius=1)
    assert alone[1].target == 's2'


def test_other_idle_vehicles_lower_potential():
    network = _line([0.1, 0.0, 0.6, 0.0, 0.3])
    decisions = REBALANCE.run_rebalancing(network, [HELPER.make_vehicle(1, 's4')], k_w=2, k_a=1.5, other_idle=['s2'])
    assert decisions[1].stays


def test_vehicle_at_best_node_stays():
    network = _line([0.1, 0.8, 0.1])
    decisions = REBALANCE.run_rebalancing(network, [HELPER.make_vehicle(0, 's1')])
    assert decisions[0].stays


def test_rebalancing_is_deterministic():
    network = NETWORK.make_grid_network(3, 3)
    network = network.copy_with(arrival_prob=NETWORK.make_probability_map(network, 'corner'))
    vehicles = [HELPER.make_vehicle(i, node) for i, node in enumerate(['n4', 'n4', 'n8', 'n1'])]
    assert REBALANCE.run_rebalancing(network, vehicles) == REBALANCE.run_rebalancing(network, list(reversed(vehicles)))
