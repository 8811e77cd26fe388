"""Shake neighborhoods: client removal strategies and regret-based reinsertion.

Three removal strategies diversify the search: uniformly random clients,
clients whose removal saves the most (highest relocation cost), and clients
from routes whose bounding rectangles overlap other routes the most.  Removed
clients are reinserted by regret-2: the client with the largest gap between
its best and second-best insertion cost goes first, into its best position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import (
    CanonicalEvaluator,
    DomainError,
    Instance,
    ScenarioSet,
    Solution,
    evaluate,
)

REMOVAL_STRATEGIES = ("random", "max_relocation", "overlap")


@dataclass
class PartialSolution:
    """A solution with some clients detached from all routes."""

    solution: Solution
    removed: list[int]


@dataclass(frozen=True)
class BBox:
    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def __post_init__(self):
        if self.min_x > self.max_x or self.min_y > self.max_y:
            raise DomainError("degenerate bounding box")

    def intersection_area(self, other: "BBox") -> float:
        w = min(self.max_x, other.max_x) - max(self.min_x, other.min_x)
        h = min(self.max_y, other.max_y) - max(self.min_y, other.min_y)
        return max(w, 0.0) * max(h, 0.0)


def _check_ratio(r: float):
    if not (0 < r <= 1):
        raise DomainError("removal fraction must be in (0, 1]")


def _removal_count(solution: Solution, r: float) -> int:
    return math.ceil(r * len(solution.routed_clients()))


def _detach(solution: Solution, chosen: list[int], evaluator: CanonicalEvaluator) -> PartialSolution:
    """Splice the chosen clients out and re-canonicalize the touched routes."""
    out = solution.copy()
    chosen_set = set(chosen)
    for route in out.routes:
        if chosen_set & set(route.visits):
            route.visits = [v for v in route.visits if v not in chosen_set]
            starts = evaluator.schedule(tuple(route.visits))
            for v, s in zip(route.visits, starts):
                out.schedule[v] = s
    for v in chosen:
        out.schedule.pop(v, None)
    return PartialSolution(out, sorted(chosen))


def remove_random(
    solution: Solution,
    r: float,
    rng: np.random.Generator,
    instance: Instance,
    scenarios: ScenarioSet,
    evaluator: CanonicalEvaluator | None = None,
) -> PartialSolution:
    """Remove ceil(r * n) clients chosen uniformly at random."""
    _check_ratio(r)
    ev = evaluator or CanonicalEvaluator(instance, scenarios)
    clients = sorted(solution.routed_clients())
    k = _removal_count(solution, r)
    chosen = [clients[i] for i in rng.choice(len(clients), size=k, replace=False)]
    return _detach(solution, chosen, ev)


def relocation_cost(
    solution: Solution,
    client: int,
    instance: Instance,
    scenarios: ScenarioSet,
    evaluator: CanonicalEvaluator | None = None,
) -> float:
    """Total-cost reduction from deleting one client from the current solution.

    The route losing the client is re-canonicalized; everything else keeps its
    schedule.  May be negative when the client sits conveniently on the way.
    """
    ev = evaluator or CanonicalEvaluator(instance, scenarios)
    if client not in solution.routed_clients():
        raise DomainError(f"client {client} is not routed")
    before = evaluate(solution, instance, scenarios, check=False).total
    after_sol = _detach(solution, [client], ev).solution
    after = evaluate(after_sol, instance, scenarios, check=False).total
    return before - after


def remove_max_relocation(
    solution: Solution,
    r: float,
    instance: Instance,
    scenarios: ScenarioSet,
    evaluator: CanonicalEvaluator | None = None,
) -> PartialSolution:
    """Remove the ceil(r * n) clients with the highest relocation cost.

    Costs are computed once against the starting solution, not cascaded after
    each removal; ties go to the lower client id.
    """
    _check_ratio(r)
    ev = evaluator or CanonicalEvaluator(instance, scenarios)
    clients = sorted(solution.routed_clients())
    costs = {c: relocation_cost(solution, c, instance, scenarios, ev) for c in clients}
    ranked = sorted(clients, key=lambda c: (-costs[c], c))
    return _detach(solution, ranked[: _removal_count(solution, r)], ev)


def route_bbox(visits: list[int], instance: Instance) -> BBox | None:
    """Smallest axis-aligned rectangle covering the depot and the route's clients."""
    if not visits:
        return None
    xs = [instance.depot_xy[0]] + [instance.clients[v - 1].x for v in visits]
    ys = [instance.depot_xy[1]] + [instance.clients[v - 1].y for v in visits]
    return BBox(min(xs), min(ys), max(xs), max(ys))


def overlap_area(route_index: int, solution: Solution, instance: Instance) -> float:
    """Summed intersection area of one route's rectangle with all other routes'."""
    own = route_bbox(solution.routes[route_index].visits, instance)
    if own is None:
        return 0.0
    total = 0.0
    for k, other in enumerate(solution.routes):
        if k == route_index or not other.visits:
            continue
        total += own.intersection_area(route_bbox(other.visits, instance))
    return total


def remove_overlap(
    solution: Solution,
    r: float,
    rng: np.random.Generator,
    instance: Instance,
    scenarios: ScenarioSet,
    evaluator: CanonicalEvaluator | None = None,
) -> PartialSolution:
    """Remove clients from the routes with the largest overlapping area.

    Routes are ranked by overlap descending (ties to the lower caregiver id);
    clients are drawn uniformly from the top route, spilling into the next
    ranks when it runs out.  With fewer than two non-empty routes this is
    plain random removal.
    """
    _check_ratio(r)
    ev = evaluator or CanonicalEvaluator(instance, scenarios)
    nonempty = [k for k, route in enumerate(solution.routes) if route.visits]
    if len(nonempty) < 2:
        return remove_random(solution, r, rng, instance, scenarios, ev)
    ranked = sorted(nonempty, key=lambda k: (-overlap_area(k, solution, instance), k))
    k = _removal_count(solution, r)
    chosen: list[int] = []
    for idx in ranked:
        if len(chosen) >= k:
            break
        pool = sorted(solution.routes[idx].visits)
        take = min(k - len(chosen), len(pool))
        picked = rng.choice(len(pool), size=take, replace=False)
        chosen.extend(pool[i] for i in picked)
    return _detach(solution, chosen, ev)


def best_insertion(
    partial: PartialSolution,
    client: int,
    instance: Instance,
    scenarios: ScenarioSet,
    evaluator: CanonicalEvaluator | None = None,
) -> tuple[tuple[int, int, float], float]:
    """Two cheapest insertions of a removed client.

    Every position of every non-empty route is costed, plus the head of the
    first empty route (dispatching a fresh caregiver).  Returns
    ((route_index, position, delta), second_best_delta); the second-best is
    +inf when only one position exists.
    """
    if client not in partial.removed:
        raise DomainError(f"client {client} is not in the removed set")
    ev = evaluator or CanonicalEvaluator(instance, scenarios)
    best: tuple[int, int, float] | None = None
    second = math.inf
    first_empty_seen = False
    for ri, route in enumerate(partial.solution.routes):
        if not route.visits:
            if first_empty_seen:
                continue
            first_empty_seen = True
            positions = [0]
        else:
            positions = range(len(route.visits) + 1)
        old_cost = ev.route_cost(route.visits)
        for pos in positions:
            visits = route.visits[:pos] + [client] + route.visits[pos:]
            delta = ev.route_cost(visits) - old_cost
            if best is None or delta < best[2]:
                if best is not None:
                    second = best[2]
                best = (ri, pos, delta)
            elif delta < second:
                second = delta
    if best is None:
        raise DomainError("no insertion position available")
    return best, second


def regret_insert(
    partial: PartialSolution,
    instance: Instance,
    scenarios: ScenarioSet,
    evaluator: CanonicalEvaluator | None = None,
) -> Solution:
    """Reinsert all removed clients in maximum-regret order.

    Regret is second-best minus best insertion delta; ties prefer the larger
    best-position improvement, then the lower client id.  Insertion costs are
    recomputed after every placement.
    """
    ev = evaluator or CanonicalEvaluator(instance, scenarios)
    part = PartialSolution(partial.solution.copy(), sorted(partial.removed))
    while part.removed:
        scored = []
        for client in part.removed:
            (ri, pos, delta), second = best_insertion(part, client, instance, scenarios, ev)
            regret = second - delta
            scored.append((-regret, delta, client, ri, pos))
        scored.sort()
        _, _, client, ri, pos = scored[0]
        route = part.solution.routes[ri]
        route.visits.insert(pos, client)
        starts = ev.schedule(tuple(route.visits))
        for v, s in zip(route.visits, starts):
            part.solution.schedule[v] = s
        part.removed.remove(client)
    return part.solution


def shake(
    solution: Solution,
    strategy: str,
    r: float,
    rng: np.random.Generator,
    instance: Instance,
    scenarios: ScenarioSet,
    evaluator: CanonicalEvaluator | None = None,
) -> Solution:
    """Remove a fraction of clients with the given strategy and regret-insert them."""
    ev = evaluator or CanonicalEvaluator(instance, scenarios)
    if strategy == "random":
        partial = remove_random(solution, r, rng, instance, scenarios, ev)
    elif strategy == "max_relocation":
        partial = remove_max_relocation(solution, r, instance, scenarios, ev)
    elif strategy == "overlap":
        partial = remove_overlap(solution, r, rng, instance, scenarios, ev)
    else:
        raise DomainError(f"unknown removal strategy {strategy!r}")
    return regret_insert(partial, instance, scenarios, ev)
