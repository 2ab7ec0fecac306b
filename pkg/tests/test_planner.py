import pytest

import pyfairmod.errors as ERRORS
import pyfairmod.scltl as SCLTL
import pyfairmod.network as NETWORK
import pyfairmod.planner as PLANNER
import pyfairmod.sim as SIM
import tests.helper_test_funcs as HELPER


def _dfa(text, alphabet=None):
    return SCLTL.translate_to_dfa(SCLTL.parse_formula(text), alphabet)


def test_completed_request_starts_accepting():
    network = HELPER.line_network([1])
    dfa = _dfa('F s1')
    done = dfa.step(dfa.initial, {'s1'})
    product = PLANNER.build_product(network, 's0', [PLANNER.TrackedRequest(dfa, done)])
    assert product.is_accepting(product.initial)
    route = PLANNER.plan_route(product, 12)
    assert HELPER.compare_lists(['s0'], list(route.nodes))
    assert route.duration == 0
    assert route.arrival_times == (12,)


def test_single_transition_reaches_acceptance():
    network = HELPER.line_network([1], labels=[['x'], ['a']])
    dfa = _dfa('F a')
    product = PLANNER.build_product(network, 's0', [(dfa, dfa.initial)])
    successors = product.successors(product.initial)
    assert len(successors) == 1
    state, weight = successors[0]
    assert state.node == 's1' and weight == 1
    assert product.is_accepting(state)


def test_two_requests_accept_after_two_hops():
    network = HELPER.line_network([1, 1], labels=[['x'], ['a'], ['b']])
    tracked = [(_dfa('F a'), 0), (_dfa('F b'), 0)]
    route = PLANNER.plan_route(PLANNER.build_product(network, 's0', tracked), 0)
    assert HELPER.compare_lists(['s0', 's1', 's2'], list(route.nodes))
    assert route.duration == 2


def test_unreachable_acceptance_is_infeasible():
    network = HELPER.line_network([1])
    dfa = _dfa('F s0')
    assert PLANNER.plan_route(PLANNER.build_product(network, 's1', [(dfa, dfa.initial)]), 0) is None


def test_invalid_product_state():
    network = HELPER.line_network([1])
    dfa = _dfa('F s1')
    with pytest.raises(ERRORS.InvalidProductStateError):
        PLANNER.build_product(network, 'elsewhere', [(dfa, dfa.initial)])
    with pytest.raises(ERRORS.InvalidProductStateError):
        PLANNER.build_product(network, 's0', [(dfa, 9)])
    with pytest.raises(ERRORS.InvalidProductStateError):
        PLANNER.build_product(network, 's0', [(dfa, PLANNER.PENDING_PICKUP, 'elsewhere')])


def test_grid_route_matches_brute_force():
    network = NETWORK.make_grid_network(2, 2, estimate_utility=False)
    dfa = _dfa('F (n0 & F n3)')
    route = PLANNER.plan_route(PLANNER.build_product(network, 'n1', [(dfa, dfa.initial)]), 0)
    assert route.duration == HELPER.brute_force_route_cost(network, 'n1', [(dfa, dfa.initial, None)], 6)
    assert route.duration == 3


def test_pending_pickup_starts_at_pick_node():
    network = HELPER.line_network([2, 3], one_way=False)
    dfa = _dfa('F (s1 & F s0)')
    tracked = [PLANNER.TrackedRequest(dfa, PLANNER.PENDING_PICKUP, 's1')]
    route = PLANNER.plan_route(PLANNER.build_product(network, 's2', tracked), 0)
    assert HELPER.compare_lists(['s2', 's1', 's0'], list(route.nodes))
    (state, t_pick, t_drop), = PLANNER.replay_route(network, route, tracked)
    assert dfa.is_accepting(state)
    assert t_pick == 3 and t_drop == 5


def test_satisfaction_time_adjacent_destination():
    network = HELPER.line_network([4], labels=[['p'], ['d']])
    assert PLANNER.satisfaction_time_from(network, 's0', _dfa('F (p & F d)')) == 4


def test_satisfaction_time_at_pick_node():
    network = HELPER.line_network([4], labels=[['p', 'd'], ['x']])
    assert PLANNER.satisfaction_time_from(network, 's0', _dfa('F (p & F d)')) == 0


def test_satisfaction_time_infeasible():
    network = HELPER.line_network([4], labels=[['p'], ['x']])
    with pytest.raises(ERRORS.InfeasibleRequestError):
        PLANNER.satisfaction_time_from(network, 's0', _dfa('F (p & F d)', ['p', 'd']))


def test_then_alt_satisfaction_matches_brute_force():
    rng = HELPER.seeded_rng(5)
    max_hops = 8
    checked = 0
    for _ in range(40):
        network = HELPER.random_network(rng, 5, edge_prob=0.45, districts=2)
        pick = network.nodes[int(rng.integers(5))]
        destinations = NETWORK.sample_destinations(network, pick, 'then-alt', rng)
        dfa = SCLTL.translate_to_dfa(SCLTL.instantiate_pattern('then-alt', network.location_proposition(pick), destinations))
        state = dfa.step(dfa.initial, network.labels(pick))
        route = PLANNER.plan_route(PLANNER.build_product(network, pick, [(dfa, state)]), 0)
        brute = HELPER.brute_force_route_cost(network, pick, [(dfa, state, None)], max_hops)
        if route is None:
            assert brute is None
            continue
        checked += 1
        if len(route.nodes) - 1 <= max_hops:
            assert brute == route.duration
        else:
            assert brute is None or brute >= route.duration
    assert checked > 0


def test_random_patterns_match_brute_force():
    rng = HELPER.seeded_rng(13)
    max_hops = 9
    checked = 0
    for _ in range(100):
        n_nodes = int(rng.integers(3, 9))
        network = HELPER.random_network(rng, n_nodes, edge_prob=0.4, districts=2)
        pick = network.nodes[int(rng.integers(n_nodes))]
        kind = SIM.PATTERNS[int(rng.integers(len(SIM.PATTERNS)))]
        destinations = NETWORK.sample_destinations(network, pick, kind, rng)
        dfa = SCLTL.translate_to_dfa(SCLTL.instantiate_pattern(kind, network.location_proposition(pick), destinations))
        state = dfa.step(dfa.initial, network.labels(pick))
        route = PLANNER.plan_route(PLANNER.build_product(network, pick, [(dfa, state)]), 0)
        brute = HELPER.brute_force_route_cost(network, pick, [(dfa, state, None)], max_hops)
        if route is None:
            assert brute is None
            continue
        checked += 1
        if len(route.nodes) - 1 <= max_hops:
            assert brute == route.duration
        else:
            assert brute is None or brute >= route.duration
    assert checked > 0


def test_search_cache_respects_cutoff():
    network = HELPER.line_network([2, 3])
    dfa = _dfa('F s2')
    product = PLANNER.build_product(network, 's0', [(dfa, dfa.initial)])
    assert PLANNER.plan_route(product, 0, cutoff=4) is None
    assert PLANNER.plan_route(product, 0, cutoff=3) is None
    assert PLANNER.plan_route(product, 0, cutoff=5).duration == 5
    assert PLANNER.plan_route(product, 0, cutoff=4) is None
    again = PLANNER.plan_route(PLANNER.build_product(network, 's0', [(dfa, dfa.initial)]), 7)
    assert again.arrival_times == (7, 9, 12)
    assert len(network.product_routes) == 1


def test_replayed_routes_accept_at_their_end():
    rng = HELPER.seeded_rng(9)
    for _ in range(30):
        network = HELPER.random_network(rng, 6, edge_prob=0.5)
        nodes = network.nodes
        first, second, third = [nodes[i] for i in rng.choice(6, size=3, replace=False)]
        tracked = [(_dfa('F ({} & F {})'.format(first, second)), 0),
                   PLANNER.TrackedRequest(_dfa('F ({} & F {})'.format(third, first)), PLANNER.PENDING_PICKUP, third)]
        route = PLANNER.plan_route(PLANNER.build_product(network, nodes[0], tracked), 100)
        if route is None:
            continue
        assert route.arrival_times[0] == 100
        progress = PLANNER.replay_route(network, route, tracked)
        assert all(t_drop is not None for _, _, t_drop in progress)
        assert max(t_drop for _, _, t_drop in progress) == route.end_time


def test_planning_origin():
    vehicle = HELPER.make_vehicle(0, 's0')
    assert PLANNER.planning_origin(vehicle, 4) == ('s0', 4, False)
    vehicle.route_nodes = ['s1', 's2']
    vehicle.route_times = [7, 9]
    assert PLANNER.planning_origin(vehicle, 4) == ('s1', 7, True)


def _request(network, request_id, pick, text, t_req=0, omega_max=40, delta_max=100):
    return SIM.make_request(network, request_id, pick, text, t_req, omega_max, delta_max)


def test_plan_for_vehicle_at_pick_node():
    network = HELPER.line_network([3], labels=[['p'], ['d']])
    request = _request(network, 0, 's0', 'F (p & F d)')
    plan = PLANNER.evaluate_service_plan(network, HELPER.make_vehicle(0, 's0'), request, 0)
    assert plan.t_pick == 0
    assert plan.t_drop == 3
    assert plan.sigma == 3
    assert plan.delay == 0


def test_plan_rejected_beyond_waiting_bound():
    network = HELPER.line_network([50, 1])
    request = _request(network, 0, 's1', 'F (s1 & F s2)')
    assert PLANNER.evaluate_service_plan(network, HELPER.make_vehicle(0, 's0'), request, 0) is None
    near = HELPER.line_network([40, 1])
    request = _request(near, 0, 's1', 'F (s1 & F s2)')
    assert PLANNER.evaluate_service_plan(near, HELPER.make_vehicle(0, 's0'), request, 0) is not None


def test_plan_rejected_beyond_delay_bound():
    network = HELPER.line_network([5, 1])
    request = _request(network, 0, 's1', 'F (s1 & F s2)', delta_max=3)
    assert PLANNER.evaluate_service_plan(network, HELPER.make_vehicle(0, 's0'), request, 0) is None


def test_plan_rejected_without_free_seats():
    network = HELPER.line_network([1, 1])
    onboard = _request(network, 0, 's0', 'F (s0 & F s2)')
    onboard.status = 'in-progress'
    onboard.dfa_state = onboard.dfa.step(onboard.dfa.initial, {'s0'})
    vehicle = HELPER.make_vehicle(0, 's0', capacity=1)
    vehicle.onboard.append(onboard)
    candidate = _request(network, 1, 's1', 'F (s1 & F s2)')
    assert PLANNER.evaluate_service_plan(network, vehicle, candidate, 0) is None


def test_joint_plan_matches_brute_force():
    network = NETWORK.make_grid_network(2, 3, estimate_utility=False)
    onboard = _request(network, 0, 'n0', 'F (n0 & F n5)')
    onboard.status = 'in-progress'
    onboard.t_pick = 0
    onboard.t_asgmt = 0
    onboard.dfa_state = onboard.dfa.step(onboard.dfa.initial, network.labels('n0'))
    vehicle = HELPER.make_vehicle(0, 'n0')
    vehicle.onboard.append(onboard)
    candidate = _request(network, 1, 'n2', 'F (n2 & F n3)')
    plan = PLANNER.evaluate_service_plan(network, vehicle, candidate, 0)
    tracked = [(onboard.dfa, onboard.dfa_state, None), (candidate.dfa, PLANNER.PENDING_PICKUP, 'n2')]
    assert plan.route.duration == HELPER.brute_force_route_cost(network, 'n0', tracked, 8)
    assert plan.route.duration == 5
    assert plan.t_pick == 2
    assert plan.sigma == plan.t_drop == 5
    assert plan.tracked_drops == {0: 3, 1: 5}


def test_onboard_requests_never_lower_sigma():
    network = NETWORK.make_grid_network(3, 3, min_weight=1, max_weight=3, seed=2, estimate_utility=False)
    rng = HELPER.seeded_rng(21)
    compared = 0
    for _ in range(40):
        start, pick, drop, first, second = [network.nodes[i] for i in rng.choice(9, size=5, replace=False)]
        candidate = _request(network, 0, pick, 'F ({} & F {})'.format(pick, drop))
        alone = PLANNER.evaluate_service_plan(network, HELPER.make_vehicle(0, start), candidate, 0)
        assert alone is not None
        vehicle = HELPER.make_vehicle(0, start)
        for request_id, destination in [(1, first), (2, second)]:
            onboard = _request(network, request_id, start, 'F ({} & F {})'.format(start, destination))
            onboard.status = 'in-progress'
            onboard.t_pick = 0
            onboard.t_asgmt = 0
            onboard.dfa_state = onboard.dfa.step(onboard.dfa.initial, network.labels(start))
            vehicle.onboard.append(onboard)
            loaded = PLANNER.evaluate_service_plan(network, vehicle, candidate, 0)
            if loaded is None:
                continue
            compared += 1
            assert loaded.sigma >= alone.sigma
    assert compared > 0
