import numpy as np
import pytest

from conftest import line_instance, make_scenario, plain_params, single_set
from vrasp.bench import generate_instance
from vrasp.domain import (
    CanonicalEvaluator,
    CostBreakdown,
    DomainError,
    Route,
    ScenarioSet,
    Solution,
    canonical_schedule,
    evaluate,
    evaluate_deterministic,
    simulate_route,
    travel_cost,
    validate_solution,
)
from vrasp.scenario import build_scenario_set


def solution_for(instance, visit_lists, scenarios):
    return CanonicalEvaluator(instance, scenarios).build_solution(visit_lists)


class TestTravelCost:
    def test_depot_to_client_scaled_distance(self):
        inst = line_instance([10.0])
        assert travel_cost(inst, 0, 1) == pytest.approx(5.0, abs=1e-12)

    def test_same_node_is_free(self):
        inst = line_instance([10.0, 20.0])
        assert travel_cost(inst, 1, 1) == 0.0

    def test_depot_copies_are_colocated(self):
        inst = line_instance([10.0])
        assert travel_cost(inst, 0, inst.depot_return) == 0.0

    def test_unknown_node_rejected(self):
        inst = line_instance([10.0])
        with pytest.raises(DomainError):
            travel_cost(inst, 0, 99)

    def test_symmetry_and_triangle_inequality(self):
        inst = generate_instance(8, seed=3)
        d = inst.distances
        nodes = range(inst.n_nodes)
        for i in nodes:
            for j in nodes:
                assert travel_cost(inst, i, j) == pytest.approx(travel_cost(inst, j, i))
                for h in nodes:
                    assert d[i, j] <= d[i, h] + d[h, j] + 1e-9


class TestCanonicalSchedule:
    def test_single_client_single_scenario(self):
        inst = line_instance([10.0])
        sset = single_set(make_scenario(inst))
        assert canonical_schedule(Route(1, [1]), sset) == {1: pytest.approx(10.0)}

    def test_single_client_takes_worst_sample(self):
        inst = line_instance([10.0])
        fast = make_scenario(inst, travel_overrides={(0, 1): 10.0})
        slow = make_scenario(inst, travel_overrides={(0, 1): 20.0})
        sset = ScenarioSet([fast, slow])
        assert canonical_schedule(Route(1, [1]), sset)[1] == pytest.approx(20.0)

    def test_two_client_forward_recursion(self):
        inst = line_instance([10.0, 20.0])
        scen = make_scenario(
            inst,
            travel_overrides={(0, 1): 10.0, (1, 2): 5.0},
            service_overrides={1: 30.0},
        )
        sched = canonical_schedule(Route(1, [1, 2]), single_set(scen))
        assert sched[1] == pytest.approx(10.0)
        assert sched[2] == pytest.approx(45.0)

    def test_empty_route_empty_schedule(self):
        inst = line_instance([10.0])
        assert canonical_schedule(Route(1, []), single_set(make_scenario(inst))) == {}

    def test_feasibility_dominance(self):
        # under a canonical schedule no training scenario ever arrives late
        inst = generate_instance(7, seed=11)
        sset = build_scenario_set(inst, 6, seed=4)
        route = Route(1, [3, 1, 6, 2])
        sched = canonical_schedule(route, sset)
        for scen in sset.scenarios:
            trace = simulate_route(route, sched, scen, inst.params)
            for v in route.visits:
                assert trace.arrival[v] <= sched[v] + 1e-9
                assert trace.wait_late[v] == 0.0


class TestSimulateRoute:
    def test_early_arrival_waits(self):
        inst = line_instance([10.0])
        scen = make_scenario(inst, travel_overrides={(0, 1): 10.0})
        trace = simulate_route(Route(1, [1]), {1: 20.0}, scen, inst.params)
        assert trace.arrival[1] == pytest.approx(10.0)
        assert trace.wait_early[1] == pytest.approx(10.0)
        assert trace.begin[1] == pytest.approx(20.0)

    def test_on_time_has_zero_wait_in_every_mode(self):
        for mode in ("earliness", "tardiness", "both"):
            inst = line_instance([10.0], params=plain_params(penalty_mode=mode))
            scen = make_scenario(inst, travel_overrides={(0, 1): 10.0})
            trace = simulate_route(Route(1, [1]), {1: 10.0}, scen, inst.params)
            assert trace.wait_early[1] == 0.0
            assert trace.wait_late[1] == 0.0

    def test_overtime_clamp_boundary(self):
        inst = line_instance([10.0])
        # return = 10 + ts + 10; pick service times landing exactly on and past L
        exact = make_scenario(inst, service_overrides={1: 460.0})
        trace = simulate_route(Route(1, [1]), {1: 10.0}, exact, inst.params)
        assert trace.return_time == pytest.approx(480.0)
        assert trace.overtime == 0.0
        over = make_scenario(inst, service_overrides={1: 467.0})
        trace = simulate_route(Route(1, [1]), {1: 10.0}, over, inst.params)
        assert trace.overtime == pytest.approx(7.0)

    def test_missing_schedule_entry_rejected(self):
        inst = line_instance([10.0])
        with pytest.raises(DomainError):
            simulate_route(Route(1, [1]), {}, make_scenario(inst), inst.params)

    def test_late_arrival_propagates(self):
        inst = line_instance([10.0, 20.0])
        scen = make_scenario(
            inst, travel_overrides={(0, 1): 30.0, (1, 2): 5.0}, service_overrides={1: 40.0, 2: 40.0}
        )
        trace = simulate_route(Route(1, [1, 2]), {1: 10.0, 2: 60.0}, scen, inst.params)
        # service starts late at client 1, pushing the second arrival past its slot
        assert trace.begin[1] == pytest.approx(30.0)
        assert trace.wait_late[1] == pytest.approx(20.0)
        assert trace.arrival[2] == pytest.approx(75.0)
        assert trace.wait_late[2] == pytest.approx(15.0)


class TestEvaluate:
    def test_all_empty_routes_cost_nothing(self):
        inst = line_instance([10.0], k=2)
        sol = Solution([Route(1, []), Route(2, [])], {})
        breakdown = evaluate(sol, inst, single_set(make_scenario(inst)), check=False)
        assert breakdown.total == 0.0

    def test_hand_evaluated_singleton(self):
        inst = line_instance([10.0])
        scen = make_scenario(inst, service_overrides={1: 30.0})
        sset = single_set(scen)
        sol = solution_for(inst, [[1]], sset)
        breakdown = evaluate(sol, inst, sset)
        assert breakdown.fixed == pytest.approx(100.0)
        assert breakdown.travel == pytest.approx(10.0)
        assert breakdown.wait_penalty == pytest.approx(0.0)
        assert breakdown.overtime_penalty == pytest.approx(0.0)
        assert breakdown.total == pytest.approx(110.0)

    def test_single_scenario_matches_deterministic(self):
        inst = generate_instance(6, seed=2)
        sset = build_scenario_set(inst, 1, seed=9)
        sol = solution_for(inst, [[1, 4, 2, 6, 3, 5]], sset)
        a = evaluate(sol, inst, sset)
        b = evaluate_deterministic(sol, inst, sset.scenarios[0])
        assert a.as_dict() == b.as_dict()

    def test_repeated_scenario_matches_single(self):
        inst = generate_instance(5, seed=5)
        scen = build_scenario_set(inst, 1, seed=1).scenarios[0]
        sol = solution_for(inst, [[2, 1, 5, 3, 4]], single_set(scen))
        once = evaluate(sol, inst, single_set(scen))
        thrice = evaluate(sol, inst, ScenarioSet([scen, scen, scen]))
        assert once.total == pytest.approx(thrice.total, abs=1e-9)

    def test_canonical_schedule_has_no_wait_under_own_scenario(self):
        inst = generate_instance(6, seed=8)
        sset = build_scenario_set(inst, 1, seed=3)
        sol = solution_for(inst, [[1, 2, 3, 4, 5, 6]], sset)
        assert evaluate(sol, inst, sset).wait_penalty == pytest.approx(0.0, abs=1e-9)

    def test_zero_penalty_rates_leave_fixed_plus_travel(self):
        inst = generate_instance(8, seed=8)
        inst.params = plain_params(c_wait=0.0, c_overtime=0.0)
        sset = build_scenario_set(inst, 4, seed=3)
        sol = solution_for(inst, [[6, 1, 3, 7], [2, 4, 5, 8]], sset)
        breakdown = evaluate(sol, inst, sset)
        assert breakdown.total == pytest.approx(breakdown.fixed + breakdown.travel)

    def test_invalid_solution_rejected(self):
        inst = line_instance([10.0, 20.0])
        sset = single_set(make_scenario(inst))
        sol = Solution([Route(1, [1])], {1: 10.0})
        with pytest.raises(DomainError):
            evaluate(sol, inst, sset)

    def test_penalty_modes_change_wait_semantics(self):
        inst = line_instance([10.0])
        scen = make_scenario(inst, travel_overrides={(0, 1): 30.0})
        sset = single_set(scen)
        late = Solution([Route(1, [1])], {1: 10.0})  # caregiver arrives 20 late
        inst.params = plain_params(penalty_mode="earliness")
        assert evaluate(late, inst, sset).wait_penalty == pytest.approx(0.0)
        inst.params = plain_params(penalty_mode="tardiness")
        assert evaluate(late, inst, sset).wait_penalty == pytest.approx(40.0)
        inst.params = plain_params(penalty_mode="both", c_tardy_extra=1.0)
        assert evaluate(late, inst, sset).wait_penalty == pytest.approx(20.0)


class TestValidateSolution:
    def test_valid_solution(self):
        inst = line_instance([10.0, 20.0], k=2)
        sol = Solution([Route(1, [1]), Route(2, [2])], {1: 10.0, 2: 20.0})
        assert validate_solution(sol, inst) == []

    def test_unserved_client_reported(self):
        inst = line_instance([10.0, 20.0], k=2)
        sol = Solution([Route(1, [1]), Route(2, [])], {1: 10.0})
        messages = validate_solution(sol, inst)
        assert any("unserved client 2" in m for m in messages)

    def test_duplicated_client_reported(self):
        inst = line_instance([10.0, 20.0], k=2)
        sol = Solution([Route(1, [1, 2]), Route(2, [2])], {1: 10.0, 2: 20.0})
        messages = validate_solution(sol, inst)
        assert any("duplicated client 2" in m for m in messages)

    def test_route_count_and_schedule_checks(self):
        inst = line_instance([10.0, 20.0], k=2)
        sol = Solution([Route(1, [1, 2])], {1: 10.0, 2: -1.0})
        messages = validate_solution(sol, inst)
        assert any("expected 2 routes" in m for m in messages)
        assert any("negative scheduled start" in m for m in messages)


def zero_wait_completion(route, schedule, scenario):
    """Independent oracle: the telescoped wait-free completion expression."""
    visits = route.visits
    total = float(scenario.travel_time[0, visits[0]])
    for a, b in zip(visits, visits[1:]):
        total += float(scenario.service_time[a]) + float(scenario.travel_time[a, b])
    return schedule[visits[-1]] - total


class TestTelescopingIdentity:
    def test_on_randomized_feasible_fixtures(self):
        rng = np.random.default_rng(123)
        checked = 0
        while checked < 200:
            n = int(rng.integers(2, 8))
            inst = generate_instance(n, seed=int(rng.integers(1 << 30)))
            sset = build_scenario_set(inst, int(rng.integers(1, 6)), seed=int(rng.integers(1 << 30)))
            size = int(rng.integers(1, n + 1))
            visits = list(rng.permutation(np.arange(1, n + 1))[:size])
            route = Route(1, [int(v) for v in visits])
            sched = canonical_schedule(route, sset)
            # any non-decreasing offset vector keeps the schedule feasible
            offsets = np.sort(rng.uniform(0, 30, size=size))
            for v, off in zip(route.visits, offsets):
                sched[v] += float(off)
            for scen in sset.scenarios:
                trace = simulate_route(route, sched, scen, inst.params)
                total_wait = sum(trace.wait_early.values())
                assert total_wait == pytest.approx(
                    zero_wait_completion(route, sched, scen), abs=1e-9
                )
            checked += 1


class TestCostBreakdown:
    def test_total_is_component_sum(self):
        b = CostBreakdown(1.5, 2.25, 3.125, 4.0625)
        assert b.total == pytest.approx(1.5 + 2.25 + 3.125 + 4.0625, abs=1e-9)

    def test_trace_invariants_on_random_fixture(self):
        inst = generate_instance(6, seed=21)
        sset = build_scenario_set(inst, 3, seed=2)
        sol = solution_for(inst, [[3, 1, 5, 2, 4, 6]], sset)
        for scen in sset.scenarios:
            trace = simulate_route(sol.routes[0], sol.schedule, scen, inst.params)
            for v in sol.routes[0].visits:
                assert trace.begin[v] >= trace.arrival[v] - 1e-12
                assert trace.begin[v] >= sol.schedule[v] - 1e-12
                assert trace.wait_early[v] >= 0
                assert trace.wait_late[v] >= 0
            assert trace.overtime >= 0
