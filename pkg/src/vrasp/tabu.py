"""Tabu-search local improvement alternating segment reversals and client swaps.

Moves are attributed by the undirected edges they remove from the tour graph
(both depot copies count as one endpoint).  Reinserting a removed edge is
forbidden while its tabu tenure lasts, unless the candidate beats the best
solution found so far (aspiration).  The walk always moves to the best
admissible candidate, even when it is worse than the current solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import CanonicalEvaluator, Instance, ScenarioSet, Solution

Edge = tuple[int, int]


@dataclass
class TabuList:
    """Forbidden edges with their expiry iterations.

    An edge added at iteration ``it`` with tenure ``theta`` is tabu for
    iterations ``it + 1`` through ``it + theta`` inclusive.
    """

    tenure_min: int = 5
    tenure_max: int = 10
    entries: dict[Edge, int] = field(default_factory=dict)

    def add(self, edge: Edge, iteration: int, rng: np.random.Generator):
        tenure = int(rng.integers(self.tenure_min, self.tenure_max + 1))
        self.entries[edge] = iteration + tenure

    def is_tabu(self, edge: Edge, iteration: int) -> bool:
        expiry = self.entries.get(edge)
        return expiry is not None and iteration <= expiry


def route_edges(visits: list[int]) -> frozenset[Edge]:
    """Undirected edges of a route, with both depot copies mapped to node 0."""
    if not visits:
        return frozenset()
    path = [0, *visits, 0]
    return frozenset(
        (min(a, b), max(a, b)) for a, b in zip(path, path[1:])
    )


@dataclass
class Candidate:
    """One evaluated neighbor: the new visit lists plus the edge delta of the move."""

    visit_lists: list[list[int]]
    cost: float
    removed_edges: frozenset[Edge]
    added_edges: frozenset[Edge]


def _admissible(candidate: Candidate, tabu: TabuList, iteration: int, best_cost: float) -> bool:
    if candidate.cost < best_cost:
        return True
    return not any(tabu.is_tabu(e, iteration) for e in candidate.added_edges)


def two_opt_moves(
    solution: Solution,
    tabu: TabuList,
    instance: Instance,
    scenarios: ScenarioSet,
    evaluator: CanonicalEvaluator | None = None,
    iteration: int = 0,
    best_cost: float = float("inf"),
) -> list[Candidate]:
    """All segment reversals over all routes, minus tabu-blocked ones."""
    ev = evaluator or CanonicalEvaluator(instance, scenarios)
    lists = solution.visit_lists()
    base = [ev.route_cost(v) for v in lists]
    total = sum(base)
    out = []
    for ri, visits in enumerate(lists):
        if len(visits) < 2:
            continue
        old_edges = route_edges(visits)
        for i in range(len(visits) - 1):
            for j in range(i + 1, len(visits)):
                new_visits = visits[:i] + visits[i : j + 1][::-1] + visits[j + 1 :]
                new_edges = route_edges(new_visits)
                cost = total - base[ri] + ev.route_cost(new_visits)
                cand = Candidate(
                    [new_visits if k == ri else list(v) for k, v in enumerate(lists)],
                    cost,
                    old_edges - new_edges,
                    new_edges - old_edges,
                )
                if _admissible(cand, tabu, iteration, best_cost):
                    out.append(cand)
    return out


def swap_moves(
    solution: Solution,
    tabu: TabuList,
    instance: Instance,
    scenarios: ScenarioSet,
    evaluator: CanonicalEvaluator | None = None,
    iteration: int = 0,
    best_cost: float = float("inf"),
) -> list[Candidate]:
    """All cross-route exchanges of one client for one client."""
    ev = evaluator or CanonicalEvaluator(instance, scenarios)
    lists = solution.visit_lists()
    base = [ev.route_cost(v) for v in lists]
    total = sum(base)
    nonempty = [k for k, v in enumerate(lists) if v]
    out = []
    for ai in range(len(nonempty)):
        for bi in range(ai + 1, len(nonempty)):
            a, b = nonempty[ai], nonempty[bi]
            old_edges = route_edges(lists[a]) | route_edges(lists[b])
            for pa in range(len(lists[a])):
                for pb in range(len(lists[b])):
                    new_a = list(lists[a])
                    new_b = list(lists[b])
                    new_a[pa], new_b[pb] = new_b[pb], new_a[pa]
                    new_edges = route_edges(new_a) | route_edges(new_b)
                    cost = (
                        total
                        - base[a]
                        - base[b]
                        + ev.route_cost(new_a)
                        + ev.route_cost(new_b)
                    )
                    cand = Candidate(
                        [
                            new_a if k == a else new_b if k == b else list(v)
                            for k, v in enumerate(lists)
                        ],
                        cost,
                        old_edges - new_edges,
                        new_edges - old_edges,
                    )
                    if _admissible(cand, tabu, iteration, best_cost):
                        out.append(cand)
    return out


def tabu_search(
    start: Solution,
    max_iters: int,
    no_improve_cap: int,
    rng: np.random.Generator,
    instance: Instance,
    scenarios: ScenarioSet,
    tenure_min: int = 5,
    tenure_max: int = 10,
    evaluator: CanonicalEvaluator | None = None,
) -> tuple[Solution, Solution]:
    """Alternate reversal (odd iterations) and swap (even) moves from ``start``.

    Returns (final current solution, best solution found).  Stops after
    ``max_iters`` iterations or once ``no_improve_cap`` consecutive iterations
    fail to improve the best.
    """
    ev = evaluator or CanonicalEvaluator(instance, scenarios)
    current = ev.rescheduled(start)
    current_cost = ev.solution_cost(current.visit_lists())
    best, best_cost = current, current_cost
    tabu = TabuList(tenure_min, tenure_max)
    iteration, stalled = 1, 0
    while iteration <= max_iters and stalled <= no_improve_cap:
        mover = two_opt_moves if iteration % 2 == 1 else swap_moves
        candidates = mover(
            current, tabu, instance, scenarios, ev, iteration=iteration, best_cost=best_cost
        )
        if candidates:
            chosen = min(candidates, key=lambda c: c.cost)
            current = ev.build_solution(chosen.visit_lists)
            current_cost = chosen.cost
            for edge in chosen.removed_edges:
                tabu.add(edge, iteration, rng)
        if current_cost < best_cost:
            best, best_cost = current, current_cost
            stalled = 0
        else:
            stalled += 1
        iteration += 1
    return current, best
