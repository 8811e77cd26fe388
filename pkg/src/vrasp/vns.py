"""Variable neighborhood search: shake with rotating removal strategies, then tabu.

Each iteration perturbs the incumbent with the first strategy still on the
active list, locally improves the perturbed solution with tabu search, and
keeps the result only if it beats the incumbent.  A strategy that fails to
improve is dropped from the active list; when the list empties it resets to
the full rotation (random, max-relocation, overlap).
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .construct import build_initial
from .domain import CanonicalEvaluator, DomainError, Instance, ScenarioSet, Solution
from .neighborhoods import REMOVAL_STRATEGIES, shake
from .tabu import tabu_search


@dataclass(frozen=True)
class VnsConfig:
    """Search budget and operator parameters.

    ``tabu_no_improve_cap`` defaults to five times the client count when left
    unset.  ``time_limit`` optionally caps wall-clock seconds on top of the
    iteration budget.
    """

    max_iters: int = 1000
    removal_fraction: float = 0.2
    tabu_max_iters: int = 1000
    tabu_no_improve_cap: int | None = None
    tenure_min: int = 5
    tenure_max: int = 10
    seed: int = 0
    time_limit: float | None = None

    def __post_init__(self):
        if self.max_iters < 0:
            raise DomainError("max_iters must be >= 0")
        if not (0 < self.removal_fraction <= 1):
            raise DomainError("removal_fraction must be in (0, 1]")
        if not (1 <= self.tenure_min <= self.tenure_max):
            raise DomainError("need 1 <= tenure_min <= tenure_max")


@dataclass(frozen=True)
class LogEntry:
    iteration: int
    neighborhood: str
    cost: float
    best: float
    millis: float


@dataclass
class SearchLog:
    entries: list[LogEntry] = field(default_factory=list)

    def append(self, entry: LogEntry):
        self.entries.append(entry)

    def best_costs(self) -> list[float]:
        return [e.best for e in self.entries]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "neighborhood", "cost", "best", "millis"])
            for e in self.entries:
                writer.writerow([e.iteration, e.neighborhood, repr(e.cost), repr(e.best), f"{e.millis:.3f}"])


def vns_solve(
    instance: Instance,
    scenarios: ScenarioSet,
    config: VnsConfig | None = None,
) -> tuple[Solution, SearchLog]:
    """Construct, then iterate shake + tabu search for ``max_iters`` rounds.

    Fully deterministic for a fixed (instance, scenarios, config): a single
    seeded generator drives the shake draws and tabu tenures in sequence.
    """
    config = config or VnsConfig()
    ev = CanonicalEvaluator(instance, scenarios)
    rng = np.random.default_rng(config.seed)
    no_improve_cap = (
        5 * instance.n if config.tabu_no_improve_cap is None else config.tabu_no_improve_cap
    )
    t0 = time.perf_counter()
    best = build_initial(instance, scenarios, ev)
    best_cost = ev.solution_cost(best.visit_lists())
    log = SearchLog()
    log.append(LogEntry(0, "init", best_cost, best_cost, (time.perf_counter() - t0) * 1e3))
    active = list(REMOVAL_STRATEGIES)
    for iteration in range(1, config.max_iters + 1):
        if config.time_limit is not None and time.perf_counter() - t0 > config.time_limit:
            break
        strategy = active[0]
        shaken = shake(
            best, strategy, config.removal_fraction, rng, instance, scenarios, ev
        )
        _, candidate = tabu_search(
            shaken,
            config.tabu_max_iters,
            no_improve_cap,
            rng,
            instance,
            scenarios,
            tenure_min=config.tenure_min,
            tenure_max=config.tenure_max,
            evaluator=ev,
        )
        candidate_cost = ev.solution_cost(candidate.visit_lists())
        if candidate_cost < best_cost:
            best, best_cost = candidate, candidate_cost
        else:
            active.remove(strategy)
            if not active:
                active = list(REMOVAL_STRATEGIES)
        log.append(
            LogEntry(
                iteration,
                strategy,
                candidate_cost,
                best_cost,
                (time.perf_counter() - t0) * 1e3,
            )
        )
    return best, log


def configured_for(instance: Instance, config: VnsConfig, seed: int | None = None) -> VnsConfig:
    """Copy of a config with the per-instance no-improvement cap resolved."""
    cap = 5 * instance.n if config.tabu_no_improve_cap is None else config.tabu_no_improve_cap
    out = replace(config, tabu_no_improve_cap=cap)
    if seed is not None:
        out = replace(out, seed=seed)
    return out
