import numpy as np
import pytest

from conftest import line_instance, make_scenario, plain_params, single_set, xy_instance
from vrasp.bench import generate_instance
from vrasp.construct import build_initial, initial_routes, route_cost, savings
from vrasp.domain import CanonicalEvaluator, DomainError, Route, ScenarioSet, validate_solution
from vrasp.scenario import build_scenario_set


def no_penalty_params():
    return plain_params(c_wait=0.0, c_overtime=0.0)


class TestInitialRoutes:
    def test_one_singleton_per_client_in_id_order(self):
        inst = line_instance([10.0, 20.0, 30.0], k=3)
        routes = initial_routes(inst)
        assert [r.visits for r in routes] == [[1], [2], [3]]

    def test_single_client(self):
        inst = line_instance([10.0])
        assert [r.visits for r in initial_routes(inst)] == [[1]]


class TestRouteCost:
    def test_hand_evaluated_singleton(self):
        inst = line_instance([10.0])
        sset = single_set(make_scenario(inst, service_overrides={1: 30.0}))
        assert route_cost(Route(1, [1]), inst, sset) == pytest.approx(110.0)

    def test_empty_route_free(self):
        inst = line_instance([10.0])
        sset = single_set(make_scenario(inst))
        assert route_cost(Route(1, []), inst, sset) == 0.0

    def test_invariant_to_owning_caregiver(self):
        inst = line_instance([10.0, 20.0], k=2)
        sset = single_set(make_scenario(inst, service=35.0))
        assert route_cost(Route(1, [1, 2]), inst, sset) == route_cost(
            Route(2, [1, 2]), inst, sset
        )


class TestSavings:
    def fixture(self):
        inst = line_instance([10.0, 20.0], k=2, params=no_penalty_params())
        sset = single_set(make_scenario(inst))
        return inst, sset

    def test_hand_evaluated_saving(self):
        inst, sset = self.fixture()
        value, merged = savings(Route(1, [1]), Route(2, [2]), inst, sset)
        assert route_cost(Route(1, [1]), inst, sset) == pytest.approx(110.0)
        assert route_cost(Route(2, [2]), inst, sset) == pytest.approx(120.0)
        assert value == pytest.approx(110.0)
        assert sorted(merged.visits) == [1, 2]

    def test_end_to_end_orientations_only(self):
        inst = line_instance([10.0, 20.0, 30.0, 40.0, 50.0], k=5, params=no_penalty_params())
        sset = single_set(make_scenario(inst))
        _, merged = savings(Route(1, [1, 2]), Route(2, [5, 4, 3]), inst, sset)
        assert merged.visits in ([1, 2, 5, 4, 3], [5, 4, 3, 1, 2])

    def test_symmetric_in_arguments(self):
        inst, sset = self.fixture()
        a, _ = savings(Route(1, [1]), Route(2, [2]), inst, sset)
        b, _ = savings(Route(2, [2]), Route(1, [1]), inst, sset)
        assert a == pytest.approx(b)

    def test_overlapping_routes_rejected(self):
        inst, sset = self.fixture()
        with pytest.raises(DomainError):
            savings(Route(1, [1]), Route(2, [1]), inst, sset)

    def test_accepted_merge_changes_total_by_exactly_the_saving(self):
        inst = generate_instance(6, seed=13)
        sset = build_scenario_set(inst, 3, seed=5)
        ev = CanonicalEvaluator(inst, sset)
        p, q = Route(1, [1, 4]), Route(2, [2, 5, 6])
        value, merged = savings(p, q, inst, sset, ev)
        before = ev.route_cost(p.visits) + ev.route_cost(q.visits) + ev.route_cost([3])
        after = ev.route_cost(merged.visits) + ev.route_cost([3])
        assert before - after == pytest.approx(value, abs=1e-9)


class TestBuildInitial:
    def test_colocated_clients_merge_even_with_spare_caregivers(self):
        inst = xy_instance([(0.0, 10.0), (0.0, 10.0)], k=2)
        sset = single_set(make_scenario(inst, service=30.0))
        sol = build_initial(inst, sset)
        nonempty = [r for r in sol.routes if r.visits]
        assert len(nonempty) == 1
        assert sorted(nonempty[0].visits) == [1, 2]

    def test_negative_savings_stop_with_enough_caregivers(self):
        # opposite-side clients: no travel saving, and sampled travel spread
        # makes the merged second visit wait, so merging only costs money
        inst = xy_instance(
            [(0.0, 50.0), (0.0, -50.0)], k=2, params=plain_params(c_fixed=0.0)
        )
        slow = make_scenario(inst, gamma=1.5)
        fast = make_scenario(inst, gamma=0.5)
        sset = ScenarioSet([slow, fast])
        value, _ = savings(Route(1, [1]), Route(2, [2]), inst, sset)
        assert value < 0
        sol = build_initial(inst, sset)
        assert sorted(len(r.visits) for r in sol.routes) == [1, 1]

    def test_forced_merges_respect_caregiver_count(self):
        # 480-minute services make every merge violate the shift, yet only one
        # caregiver exists, so merges are forced and overtime is paid
        inst = line_instance([10.0, 20.0, 30.0], k=1)
        sset = single_set(make_scenario(inst, service=480.0))
        sol = build_initial(inst, sset)
        assert validate_solution(sol, inst) == []
        assert len([r for r in sol.routes if r.visits]) == 1

    def test_duration_check_blocks_otherwise_positive_merges(self):
        inst = line_instance([10.0, 20.0], k=2)
        sset = single_set(make_scenario(inst, service=300.0))
        # merged completion = 10 + 300 + 10 + 300 + 20 = 640 > 480
        sol = build_initial(inst, sset)
        assert sorted(len(r.visits) for r in sol.routes) == [1, 1]

    def test_output_valid_and_within_fleet_on_random_instances(self):
        rng = np.random.default_rng(7)
        for _ in range(15):
            n = int(rng.integers(2, 13))
            inst = generate_instance(n, seed=int(rng.integers(1 << 30)))
            sset = build_scenario_set(inst, 2, seed=int(rng.integers(1 << 30)))
            sol = build_initial(inst, sset)
            assert validate_solution(sol, inst) == []
            assert len([r for r in sol.routes if r.visits]) <= inst.caregiver_count

    def test_deterministic(self):
        inst = generate_instance(9, seed=31)
        sset = build_scenario_set(inst, 3, seed=8)
        a = build_initial(inst, sset)
        b = build_initial(inst, sset)
        assert a.visit_lists() == b.visit_lists()
        assert a.schedule == b.schedule
