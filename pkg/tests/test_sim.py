import pytest

import json

import numpy as np

import pyfairmod.errors as ERRORS
import pyfairmod.network as NETWORK
import pyfairmod.sim as SIM
import tests.helper_test_funcs as HELPER


def _ride_network():
    return HELPER.line_network([5], labels=[['a'], ['b']])


def _grid():
    return NETWORK.make_grid_network(3, 3)


def test_config_validation():
    with pytest.raises(ERRORS.ConfigError):
        SIM.ScenarioConfig.from_dict({'horizon': 100, 'speed': 3})
    for bad in [{'horizon': 0}, {'epsilon': 0}, {'k_a': 1.0}, {'seats': 5, 'capacity': 4},
                {'arrival_process': 'bursty'}, {'assignment': 'greedy'}, {'n_requests': -1},
                {'probability_map': {'kind': 'ring'}}, {'cycle_period': 2.5}]:
        with pytest.raises(ERRORS.ConfigError):
            SIM.ScenarioConfig.from_dict(bad)
    config = SIM.ScenarioConfig.from_dict({'horizon': 100, 'weight_correction': False})
    assert config.effective_alpha == 0.0
    assert SIM.ScenarioConfig.from_dict(config.to_dict()) == config


def test_single_ride():
    network = _ride_network()
    request = SIM.make_request(network, 0, 's0', 'F (a & F b)', 0, 40, 100)
    assert request.t_star == 5
    config = HELPER.small_config(horizon=20)
    world = SIM.simulate(config, network=network, requests=[request], positions=['s0'])
    metrics = SIM.compute_metrics(world)
    assert metrics.total_travel_time == 5
    assert metrics.utilities == [5.0]
    assert metrics.serving_rate == 1.0
    assert request.status == 'completed'
    assert (request.t_asgmt, request.t_pick, request.t_drop) == (0, 0, 5)
    assert request.delay == 0


def test_no_requests():
    config = HELPER.small_config(n_vehicles=3)
    metrics = SIM.run_simulation(config, network=_grid())
    assert metrics.utilities == [0.0, 0.0, 0.0]
    assert metrics.total_travel_time == 0
    assert metrics.serving_rate == 1.0


def test_idle_step_only_advances_clock():
    network = _ride_network()
    world = SIM.WorldState(network, HELPER.small_config(), [], [HELPER.make_vehicle(0, 's0')])
    SIM.step_world(world)
    assert world.clock == 1
    assert world.vehicles[0].utility == 0
    assert world.vehicles[0].position == 's0'
    assert world.events == []


def test_utility_accrues_per_occupied_seat():
    network = _ride_network()
    request = SIM.make_request(network, 0, 's0', 'F (a & F b)', 0, 40, 100)
    request.status = 'in-progress'
    request.dfa_state = request.dfa.step(request.dfa.initial, {'a'})
    vehicle = HELPER.make_vehicle(0, 's0', capacity=4)
    vehicle.onboard.append(request)
    world = SIM.WorldState(network, HELPER.small_config(), [request], [vehicle])
    assert vehicle.free_seats == 3
    assert vehicle.status == 'available'
    for _ in range(10):
        SIM.step_world(world)
    assert vehicle.utility == 10


def test_unserved_request_expires_after_waiting_bound():
    network = _ride_network()
    request = SIM.make_request(network, 0, 's0', 'F (a & F b)', 0, 40, 100)
    config = HELPER.small_config(horizon=60)
    world = SIM.simulate(config, network=network, requests=[request], positions=['s1'])
    assert request.status == 'expired'
    expired = [event for event in world.events if event['kind'] == 'expire']
    assert len(expired) == 1
    assert expired[0]['time'] == 41
    metrics = SIM.compute_metrics(world)
    assert metrics.expired == 1
    assert metrics.serving_rate == 0.0


def test_compute_metrics_aggregates():
    world = SIM.WorldState(_ride_network(), HELPER.small_config(), [],
                           [HELPER.make_vehicle(i, 's0', utility=u) for i, u in enumerate([2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0])])
    metrics = SIM.compute_metrics(world)
    assert metrics.min_utility == 2.0
    assert metrics.max_utility == 9.0
    assert metrics.avg_utility == 5.0
    assert metrics.utility_std == pytest.approx(2.0)


def test_vehicle_status():
    vehicle = HELPER.make_vehicle(0, 's0', capacity=1)
    assert vehicle.status == 'vacant'
    vehicle.rebalancing = True
    assert vehicle.status == 'rebalancing'
    vehicle.onboard.append(SIM.RequestRecord(0, 's0', None, None, 0, 0, 40, 100))
    assert vehicle.status == 'occupied'


def test_generated_requests_are_deterministic():
    network = _grid()
    config = SIM.ScenarioConfig(n_requests=12, horizon=200, seed=3)
    first = SIM.generate_requests(config, network)
    second = SIM.generate_requests(config, network)
    assert len(first) == 12
    assert [(r.t_req, r.pick_node, str(r.formula)) for r in first] == [(r.t_req, r.pick_node, str(r.formula)) for r in second]
    assert all(a.t_req <= b.t_req for a, b in zip(first, first[1:]))
    assert all(r.pattern in SIM.PATTERNS for r in first)
    assert all(0 <= r.t_req < 200 for r in first)


def test_zero_probability_node_never_picked():
    network = _grid()
    probabilities = {node: (0.0 if node == 'n4' else 1.0 / 8) for node in network.nodes}
    network = network.copy_with(arrival_prob=probabilities)
    requests = SIM.generate_requests(SIM.ScenarioConfig(n_requests=60, horizon=600, seed=1), network)
    assert all(request.pick_node != 'n4' for request in requests)


def test_poisson_arrival_count():
    config = SIM.ScenarioConfig(n_requests=300, horizon=1000, arrival_process='poisson')
    for seed in range(5):
        times = SIM._arrival_times(config, np.random.default_rng(seed))
        assert abs(len(times) - 300) <= 3 * np.sqrt(300)
        assert all(0 <= t < 1000 for t in times)


def test_request_generation_gives_up_on_tiny_maps():
    network = HELPER.line_network([1])
    with pytest.raises(ERRORS.RequestGenerationError):
        SIM.generate_requests(SIM.ScenarioConfig(n_requests=1, horizon=10), network)


def test_vehicle_placement_is_seeded():
    network = _grid()
    config = SIM.ScenarioConfig(n_vehicles=5, seed=4)
    first = [vehicle.position for vehicle in SIM.place_vehicles(config, network)]
    assert first == [vehicle.position for vehicle in SIM.place_vehicles(config, network)]
    assert all(position in network for position in first)


def _scenario(**fields):
    values = {'horizon': 150, 'n_vehicles': 3, 'n_requests': 8, 'seed': 5}
    values.update(fields)
    return SIM.ScenarioConfig(**values)


def test_simulation_is_deterministic():
    network = _grid()
    first = SIM.simulate(_scenario(), network=network)
    second = SIM.simulate(_scenario(), network=network)
    assert SIM.compute_metrics(first) == SIM.compute_metrics(second)
    assert first.events == second.events


def test_requests_and_utilities_are_conserved():
    network = _grid()
    for fields in [{}, {'rebalancing': False}, {'weight_correction': False, 'seats': 2}, {'assignment': 'oracle'}]:
        world = SIM.simulate(_scenario(**fields), network=network)
        counts = world.status_counts()
        assert sum(counts.values()) == len(world.requests)
        metrics = SIM.compute_metrics(world)
        assert metrics.served + metrics.expired + metrics.in_progress + metrics.active == metrics.total_requests
        assert metrics.min_utility <= metrics.avg_utility <= metrics.max_utility
        recomputed = SIM.utility_from_events(world.events, world.config.horizon)
        for vehicle in world.vehicles:
            assert vehicle.utility == recomputed.get(vehicle.id, 0)
        for request in world.requests:
            if request.status == 'completed':
                assert request.t_pick <= request.t_req + request.omega_max
                assert request.delay <= request.delta_max
                assert request.sigma >= 0


def test_oracle_gaps_are_recorded():
    world = SIM.simulate(_scenario(record_oracle_gap=True, weight_correction=False, price_init='zero', epsilon=1.0,
                                   max_rounds=10000),
                         network=_grid())
    assert world.round_limit_hits == 0
    assert len(world.oracle_gaps) > 0
    for gap in world.oracle_gaps:
        assert gap['gap'] <= gap['bound'] + 1e-9


def test_message_trace_is_opt_in():
    network = _grid()
    assert SIM.simulate(_scenario(), network=network).message_trace == []
    traced = SIM.simulate(_scenario(record_trace=True), network=network)
    assert len(traced.message_trace) > 0
    assert all('time' in record and 'stage' in record for record in traced.message_trace)


def test_event_log_export(tmp_path):
    world = SIM.simulate(_scenario(), network=_grid())
    path = tmp_path / 'events.jsonl'
    SIM.export_event_log(world, str(path))
    assert len(path.read_text().splitlines()) == len(world.events)


def test_missing_network():
    with pytest.raises(ERRORS.ConfigError):
        SIM.simulate(SIM.ScenarioConfig(n_requests=0))


def test_scenario_probability_map_is_applied(tmp_path):
    path = str(tmp_path / 'grid.json')
    with open(path, 'w') as fp:
        json.dump(NETWORK.network_to_document(_grid()), fp)
    config = SIM.ScenarioConfig(network=path, probability_map={'kind': 'center'})
    network = SIM.load_scenario_network(config)
    expected = NETWORK.make_probability_map(network, 'center')
    for node in network.nodes:
        assert network.arrival_prob(node) == pytest.approx(expected[node])
