"""Core data model and cost evaluation for joint routing and appointment scheduling.

A problem instance is a set of clients plus a depot that acts as both the
origin (node 0) and the destination (node n+1) of every route.  A solution
assigns every client to exactly one caregiver route and fixes a scheduled
service start time per client.  Costs have four components: a fixed dispatch
cost per non-empty route, travel cost proportional to Euclidean distance,
waiting penalties, and overtime penalties.  Waiting and overtime are averaged
over a set of sampled travel/service-time scenarios; with a single scenario
the evaluation reduces to the deterministic model.

All functions here are pure; nothing mutates its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

PENALTY_MODES = ("earliness", "tardiness", "both")


class DomainError(ValueError):
    """Invalid input for a domain operation (bad node id, invalid solution, ...)."""


@dataclass(frozen=True)
class Client:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class CostParams:
    """Cost rates and the working-time horizon.

    ``penalty_mode`` selects which waiting time is penalized: "earliness"
    charges ``c_wait`` per minute the caregiver waits for the appointment
    (arrival before the scheduled start), "tardiness" charges ``c_wait`` per
    minute the client waits (arrival after the scheduled start), and "both"
    charges ``c_wait`` for earliness plus ``c_tardy_extra`` for tardiness.
    """

    c_fixed: float
    c_overtime: float
    c_wait: float
    travel_cost_factor: float
    shift_length: float
    penalty_mode: str = "earliness"
    c_tardy_extra: float = 0.0

    def __post_init__(self):
        for name in ("c_fixed", "c_overtime", "c_wait", "travel_cost_factor", "c_tardy_extra"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")
        if self.shift_length <= 0:
            raise DomainError("shift_length must be > 0")
        if self.penalty_mode not in PENALTY_MODES:
            raise DomainError(f"penalty_mode must be one of {PENALTY_MODES}")

    def wait_rates(self) -> tuple[float, float]:
        """(earliness rate, tardiness rate) per minute for this mode."""
        if self.penalty_mode == "earliness":
            return self.c_wait, 0.0
        if self.penalty_mode == "tardiness":
            return 0.0, self.c_wait
        return self.c_wait, self.c_tardy_extra


@dataclass
class Instance:
    """Clients, depot location, caregiver count and cost parameters.

    Node indexing convention used throughout: node 0 and node ``n+1`` are the
    depot origin/destination (same physical location), clients are 1..n and
    client ids coincide with node indices.
    """

    clients: list[Client]
    depot_xy: tuple[float, float]
    caregiver_count: int
    params: CostParams

    def __post_init__(self):
        if self.caregiver_count < 1:
            raise DomainError("caregiver_count must be >= 1")
        if not self.clients:
            raise DomainError("instance needs at least one client")
        ids = [c.id for c in self.clients]
        if ids != list(range(1, len(ids) + 1)):
            raise DomainError("client ids must be 1..n in order")
        for c in self.clients:
            if not (math.isfinite(c.x) and math.isfinite(c.y)):
                raise DomainError(f"client {c.id} has non-finite coordinates")

    @property
    def n(self) -> int:
        return len(self.clients)

    @property
    def depot_return(self) -> int:
        return self.n + 1

    @property
    def n_nodes(self) -> int:
        return self.n + 2

    @cached_property
    def coords(self) -> np.ndarray:
        """(n+2, 2) array of node coordinates, depot at rows 0 and n+1."""
        pts = [self.depot_xy] + [(c.x, c.y) for c in self.clients] + [self.depot_xy]
        return np.asarray(pts, dtype=float)

    @cached_property
    def distances(self) -> np.ndarray:
        """Euclidean node-to-node distance matrix, (n+2, n+2)."""
        d = self.coords[:, None, :] - self.coords[None, :, :]
        return np.sqrt((d * d).sum(axis=2))


@dataclass
class Scenario:
    """One realization of travel times (minutes, node x node) and service times.

    ``service_time`` is indexed by node; entries for the depot rows (0 and n+1)
    are zero.  Travel tables are symmetric with a zero diagonal and zero
    between the two depot copies.
    """

    travel_time: np.ndarray
    service_time: np.ndarray

    def __post_init__(self):
        self.travel_time = np.asarray(self.travel_time, dtype=float)
        self.service_time = np.asarray(self.service_time, dtype=float)
        t = self.travel_time
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise DomainError("travel_time must be a square matrix")
        if self.service_time.shape != (t.shape[0],):
            raise DomainError("service_time must have one entry per node")
        if (t < 0).any() or (self.service_time < 0).any():
            raise DomainError("times must be nonnegative")
        if not np.allclose(t, t.T, atol=1e-9):
            raise DomainError("travel_time must be symmetric")

    @property
    def n_nodes(self) -> int:
        return self.travel_time.shape[0]


@dataclass
class ScenarioSet:
    """An ordered collection of scenarios plus the seed that produced it."""

    scenarios: list[Scenario]
    seed: int = 0
    label: str = ""

    def __post_init__(self):
        if not self.scenarios:
            raise DomainError("scenario set must not be empty")
        sizes = {s.n_nodes for s in self.scenarios}
        if len(sizes) != 1:
            raise DomainError("scenarios are dimensioned inconsistently")

    def __len__(self) -> int:
        return len(self.scenarios)

    @property
    def n_nodes(self) -> int:
        return self.scenarios[0].n_nodes

    @cached_property
    def travel(self) -> np.ndarray:
        """(M, V, V) stacked travel-time tables."""
        return np.stack([s.travel_time for s in self.scenarios])

    @cached_property
    def service(self) -> np.ndarray:
        """(M, V) stacked service times."""
        return np.stack([s.service_time for s in self.scenarios])

    @cached_property
    def spacing(self) -> np.ndarray:
        """(V, V) worst-case hop spacing: max over scenarios of service(i) + travel(i, j).

        Entry (i, j) is the minimum gap any feasible schedule must leave
        between the starts at i and j when j directly follows i.
        """
        return (self.service[:, :, None] + self.travel).max(axis=0)


@dataclass
class Route:
    """Ordered client visits assigned to one caregiver (may be empty)."""

    caregiver: int
    visits: list[int] = field(default_factory=list)

    def __post_init__(self):
        if len(set(self.visits)) != len(self.visits):
            raise DomainError(f"route {self.caregiver} repeats a client")

    def copy(self) -> "Route":
        return Route(self.caregiver, list(self.visits))


@dataclass
class Solution:
    """One route per caregiver plus the scheduled start time per client."""

    routes: list[Route]
    schedule: dict[int, float]

    def copy(self) -> "Solution":
        return Solution([r.copy() for r in self.routes], dict(self.schedule))

    def visit_lists(self) -> list[list[int]]:
        return [list(r.visits) for r in self.routes]

    def routed_clients(self) -> list[int]:
        return [v for r in self.routes for v in r.visits]


@dataclass(frozen=True)
class CostBreakdown:
    fixed: float
    travel: float
    wait_penalty: float
    overtime_penalty: float

    @property
    def total(self) -> float:
        return self.fixed + self.travel + self.wait_penalty + self.overtime_penalty

    def as_dict(self) -> dict[str, float]:
        return {
            "fixed": self.fixed,
            "travel": self.travel,
            "wait_penalty": self.wait_penalty,
            "overtime_penalty": self.overtime_penalty,
            "total": self.total,
        }


@dataclass
class RouteTrace:
    """Realized timings of one route under one scenario.

    ``wait_early[i]`` is the caregiver idle time max(s_i - a_i, 0) and
    ``wait_late[i]`` the client wait max(a_i - s_i, 0); which of the two is
    billed depends on the penalty mode.
    """

    arrival: dict[int, float]
    begin: dict[int, float]
    wait_early: dict[int, float]
    wait_late: dict[int, float]
    return_time: float
    overtime: float


def travel_cost(instance: Instance, i: int, j: int) -> float:
    """Money cost of traversing the arc between nodes i and j."""
    if not (0 <= i < instance.n_nodes and 0 <= j < instance.n_nodes):
        raise DomainError(f"unknown node id in arc ({i}, {j})")
    return instance.params.travel_cost_factor * float(instance.distances[i, j])


def route_travel_cost(instance: Instance, visits: Sequence[int]) -> float:
    """Travel cost of a full route including both depot legs."""
    if not visits:
        return 0.0
    path = [0, *visits, instance.depot_return]
    d = instance.distances
    return instance.params.travel_cost_factor * float(
        sum(d[path[k], path[k + 1]] for k in range(len(path) - 1))
    )


def canonical_schedule(route: Route, scenarios: ScenarioSet) -> dict[int, float]:
    """Componentwise-minimal schedule feasible for every scenario in the set.

    The caregiver leaves the depot at time 0, so the first visit cannot be
    scheduled before the slowest sampled first leg; each later visit is pushed
    by the worst sampled service-plus-travel gap from its predecessor.  Under
    this schedule the caregiver is never late in any training scenario.
    """
    g = scenarios.spacing
    sched: dict[int, float] = {}
    prev = 0
    t = 0.0
    for v in route.visits:
        if not (1 <= v < scenarios.n_nodes - 1):
            raise DomainError(f"route visits unknown client {v}")
        t += float(g[prev, v])
        sched[v] = t
        prev = v
    return sched


def simulate_route(
    route: Route,
    schedule: dict[int, float],
    scenario: Scenario,
    params: CostParams,
) -> RouteTrace:
    """Replay one route against one realized scenario.

    Service begins at max(arrival, scheduled start).  The return time uses the
    realized begin of the last visit, which keeps the trace meaningful even
    when the schedule is infeasible for this scenario (late arrivals simply
    propagate).
    """
    t = scenario.travel_time
    ts = scenario.service_time
    dest = scenario.n_nodes - 1
    arrival: dict[int, float] = {}
    begin: dict[int, float] = {}
    early: dict[int, float] = {}
    late: dict[int, float] = {}
    if not route.visits:
        return RouteTrace(arrival, begin, early, late, 0.0, 0.0)
    prev = 0
    clock = 0.0
    for v in route.visits:
        if v not in schedule:
            raise DomainError(f"no schedule entry for client {v}")
        a = clock + float(t[prev, v])
        s = schedule[v]
        b = max(a, s)
        arrival[v] = a
        begin[v] = b
        early[v] = max(s - a, 0.0)
        late[v] = max(a - s, 0.0)
        clock = b + float(ts[v])
        prev = v
    ret = clock + float(t[prev, dest])
    overtime = max(ret - params.shift_length, 0.0)
    return RouteTrace(arrival, begin, early, late, ret, overtime)


def _route_penalty_arrays(
    visits: Sequence[int],
    starts: Sequence[float],
    travel: np.ndarray,
    service: np.ndarray,
    shift_length: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized simulation of one route over all scenarios at once.

    Returns per-scenario (summed earliness wait, summed tardiness wait,
    overtime).  ``travel`` is (M, V, V) and ``service`` (M, V).
    """
    m = travel.shape[0]
    dest = travel.shape[1] - 1
    early = np.zeros(m)
    late = np.zeros(m)
    if not visits:
        return early, late, np.zeros(m)
    prev = 0
    clock = np.zeros(m)
    for v, s in zip(visits, starts):
        a = clock + travel[:, prev, v]
        e = s - a
        np.maximum(e, 0.0, out=e)
        early += e
        l = a - s
        np.maximum(l, 0.0, out=l)
        late += l
        clock = np.maximum(a, s) + service[:, v]
        prev = v
    ret = clock + travel[:, prev, dest]
    overtime = np.maximum(ret - shift_length, 0.0)
    return early, late, overtime


def validate_solution(solution: Solution, instance: Instance) -> list[str]:
    """Structural checks; returns human-readable violations (empty when valid)."""
    violations = []
    if len(solution.routes) != instance.caregiver_count:
        violations.append(
            f"expected {instance.caregiver_count} routes, got {len(solution.routes)}"
        )
    caregivers = [r.caregiver for r in solution.routes]
    if sorted(caregivers) != list(range(1, len(solution.routes) + 1)):
        violations.append(f"caregiver ids are not 1..{len(solution.routes)}: {caregivers}")
    seen: dict[int, int] = {}
    for r in solution.routes:
        for v in r.visits:
            seen[v] = seen.get(v, 0) + 1
    all_ids = set(range(1, instance.n + 1))
    for v in sorted(set(seen) - all_ids):
        violations.append(f"unknown client {v} in routes")
    for v in sorted(all_ids - set(seen)):
        violations.append(f"unserved client {v}")
    for v, count in sorted(seen.items()):
        if count > 1 and v in all_ids:
            violations.append(f"duplicated client {v} ({count} routes)")
    for v in sorted(all_ids):
        if v not in solution.schedule:
            violations.append(f"no scheduled start for client {v}")
        elif solution.schedule[v] < 0:
            violations.append(f"negative scheduled start for client {v}")
    return violations


def evaluate_per_scenario(
    solution: Solution,
    instance: Instance,
    scenarios: ScenarioSet,
    check: bool = True,
) -> tuple[CostBreakdown, np.ndarray]:
    """Cost breakdown plus the per-scenario total cost vector.

    Fixed and travel costs are scenario-independent; waiting and overtime
    penalties are simulated per scenario and averaged.  The per-scenario
    totals feed the out-of-sample variance estimators.
    """
    if check:
        violations = validate_solution(solution, instance)
        if violations:
            raise DomainError("invalid solution: " + "; ".join(violations))
    params = instance.params
    rate_early, rate_late = params.wait_rates()
    m = len(scenarios)
    fixed = 0.0
    travel = 0.0
    penalty = np.zeros(m)
    wait_pen = 0.0
    ot_pen = 0.0
    t_all, s_all = scenarios.travel, scenarios.service
    for route in solution.routes:
        if not route.visits:
            continue
        fixed += params.c_fixed
        travel += route_travel_cost(instance, route.visits)
        try:
            starts = [solution.schedule[v] for v in route.visits]
        except KeyError as exc:
            raise DomainError(f"no schedule entry for client {exc.args[0]}") from exc
        early, late, overtime = _route_penalty_arrays(
            route.visits, starts, t_all, s_all, params.shift_length
        )
        wait = rate_early * early + rate_late * late
        ot = params.c_overtime * overtime
        penalty += wait + ot
        wait_pen += float(wait.mean())
        ot_pen += float(ot.mean())
    breakdown = CostBreakdown(fixed, travel, wait_pen, ot_pen)
    return breakdown, fixed + travel + penalty


def evaluate(
    solution: Solution,
    instance: Instance,
    scenarios: ScenarioSet,
    check: bool = True,
) -> CostBreakdown:
    """Sample-average cost of a solution over a scenario set."""
    breakdown, _ = evaluate_per_scenario(solution, instance, scenarios, check=check)
    return breakdown


def evaluate_deterministic(
    solution: Solution,
    instance: Instance,
    mean_scenario: Scenario,
    check: bool = True,
) -> CostBreakdown:
    """Deterministic-model cost: evaluation against a single scenario."""
    return evaluate(solution, instance, ScenarioSet([mean_scenario]), check=check)


class CanonicalEvaluator:
    """Caches canonical schedules and route costs for one (instance, scenario set).

    Search code evaluates the same routes over and over; keying the cost by
    the visit tuple makes repeated candidate evaluation cheap.  A route cost
    is the dispatch cost plus travel plus the sample-average waiting and
    overtime penalties under the route's canonical schedule, so a solution
    cost is simply the sum over its routes.
    """

    def __init__(self, instance: Instance, scenarios: ScenarioSet):
        if scenarios.n_nodes != instance.n_nodes:
            raise DomainError("scenario set does not match instance dimensions")
        self.instance = instance
        self.scenarios = scenarios
        self._spacing = scenarios.spacing
        self._cost: dict[tuple[int, ...], float] = {}
        self._sched: dict[tuple[int, ...], tuple[float, ...]] = {}

    def schedule(self, visits: tuple[int, ...]) -> tuple[float, ...]:
        cached = self._sched.get(visits)
        if cached is None:
            g = self._spacing
            out = []
            prev, t = 0, 0.0
            for v in visits:
                t += float(g[prev, v])
                out.append(t)
                prev = v
            cached = self._sched[visits] = tuple(out)
        return cached

    def route_cost(self, visits: Sequence[int]) -> float:
        key = tuple(visits)
        cached = self._cost.get(key)
        if cached is not None:
            return cached
        if not key:
            self._cost[key] = 0.0
            return 0.0
        params = self.instance.params
        starts = self.schedule(key)
        rate_early, rate_late = params.wait_rates()
        early, late, overtime = _route_penalty_arrays(
            key, starts, self.scenarios.travel, self.scenarios.service, params.shift_length
        )
        cost = (
            params.c_fixed
            + route_travel_cost(self.instance, key)
            + float((rate_early * early + rate_late * late).mean())
            + params.c_overtime * float(overtime.mean())
        )
        self._cost[key] = cost
        return cost

    def solution_cost(self, visit_lists: Iterable[Sequence[int]]) -> float:
        return sum(self.route_cost(v) for v in visit_lists)

    def worst_completion(self, visits: Sequence[int]) -> float:
        """Max over scenarios of the canonical-schedule return time."""
        if not visits:
            return 0.0
        key = tuple(visits)
        s_last = self.schedule(key)[-1]
        return s_last + float(self._spacing[key[-1], self.instance.depot_return])

    def build_solution(self, visit_lists: Sequence[Sequence[int]]) -> Solution:
        """Assemble a Solution with canonical schedules, one route per caregiver."""
        k = self.instance.caregiver_count
        if len(visit_lists) > k:
            raise DomainError(f"{len(visit_lists)} routes for {k} caregivers")
        routes = []
        schedule: dict[int, float] = {}
        for idx in range(k):
            visits = list(visit_lists[idx]) if idx < len(visit_lists) else []
            routes.append(Route(idx + 1, visits))
            starts = self.schedule(tuple(visits))
            schedule.update(zip(visits, starts))
        return Solution(routes, schedule)

    def rescheduled(self, solution: Solution) -> Solution:
        """Copy of a solution with every route's schedule re-canonicalized."""
        return self.build_solution(solution.visit_lists())
