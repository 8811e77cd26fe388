"""Initial solution construction by savings-based route merging (Clarke-Wright).

Starts from one singleton route per client and repeatedly applies the
end-to-end concatenation with the highest saving, subject to the merged route
finishing within the shift in every scenario.  If positive savings run out
while there are still more non-empty routes than caregivers, merges are
forced (best available saving, duration check waived) since overtime is a
soft cost.
"""

from __future__ import annotations


from .domain import (
    CanonicalEvaluator,
    DomainError,
    Instance,
    Route,
    ScenarioSet,
    Solution,
)


def initial_routes(instance: Instance) -> list[Route]:
    """One singleton route per client, in client-id order."""
    return [Route(c.id, [c.id]) for c in instance.clients]


def route_cost(
    route: Route,
    instance: Instance,
    scenarios: ScenarioSet,
    evaluator: CanonicalEvaluator | None = None,
) -> float:
    """Cost of one route under its canonical schedule (0 for an empty route)."""
    ev = evaluator or CanonicalEvaluator(instance, scenarios)
    return ev.route_cost(route.visits)


def savings(
    p: Route,
    q: Route,
    instance: Instance,
    scenarios: ScenarioSet,
    evaluator: CanonicalEvaluator | None = None,
) -> tuple[float, Route]:
    """Best end-to-end concatenation of two routes and its cost saving.

    Both orientations (p then q, q then p) are costed; no internal reordering
    is attempted.  The saving may be negative.
    """
    if not p.visits or not q.visits:
        raise DomainError("savings needs two non-empty routes")
    if set(p.visits) & set(q.visits):
        raise DomainError("routes overlap")
    ev = evaluator or CanonicalEvaluator(instance, scenarios)
    base = ev.route_cost(p.visits) + ev.route_cost(q.visits)
    pq = list(p.visits) + list(q.visits)
    qp = list(q.visits) + list(p.visits)
    cost_pq = ev.route_cost(pq)
    cost_qp = ev.route_cost(qp)
    merged = pq if cost_pq <= cost_qp else qp
    return base - min(cost_pq, cost_qp), Route(p.caregiver, merged)


def _best_merge(
    routes: list[list[int]],
    ev: CanonicalEvaluator,
    require_positive: bool,
    check_duration: bool,
) -> tuple[int, int, list[int]] | None:
    """Highest-saving feasible pair, ties broken by (min client of p, min client of q)."""
    shift = ev.instance.params.shift_length
    candidates = []
    for a in range(len(routes)):
        for b in range(a + 1, len(routes)):
            p, q = routes[a], routes[b]
            if min(p) > min(q):
                p, q, a2, b2 = q, p, b, a
            else:
                a2, b2 = a, b
            base = ev.route_cost(p) + ev.route_cost(q)
            cost_pq = ev.route_cost(p + q)
            cost_qp = ev.route_cost(q + p)
            merged = p + q if cost_pq <= cost_qp else q + p
            saving = base - min(cost_pq, cost_qp)
            candidates.append((-saving, min(p), min(q), a2, b2, merged))
    candidates.sort(key=lambda c: c[:3])
    for neg_saving, _, _, a, b, merged in candidates:
        if require_positive and -neg_saving <= 0:
            return None
        if check_duration and ev.worst_completion(merged) > shift:
            continue
        return a, b, merged
    return None


def build_initial(
    instance: Instance,
    scenarios: ScenarioSet,
    evaluator: CanonicalEvaluator | None = None,
) -> Solution:
    """Greedy best-savings merging down to at most ``caregiver_count`` routes."""
    ev = evaluator or CanonicalEvaluator(instance, scenarios)
    routes: list[list[int]] = [[c.id] for c in instance.clients]
    while len(routes) > 1:
        pick = _best_merge(routes, ev, require_positive=True, check_duration=True)
        if pick is None:
            break
        a, b, merged = pick
        routes = [r for k, r in enumerate(routes) if k not in (a, b)]
        routes.append(merged)
    while len(routes) > instance.caregiver_count:
        a, b, merged = _best_merge(routes, ev, require_positive=False, check_duration=False)
        routes = [r for k, r in enumerate(routes) if k not in (a, b)]
        routes.append(merged)
    routes.sort(key=min)
    return ev.build_solution(routes)
