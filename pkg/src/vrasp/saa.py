"""Sample-average-approximation replication framework with bound estimation.

Solves the sampled model on several independent training sets, averages the
training optima into a lower-bound estimate, re-evaluates every candidate
solution (routes and schedule held fixed) on one much larger evaluation set
to get unbiased upper-bound estimates, and reports the optimality gap of the
cheapest candidate together with the variances of both estimators.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .domain import (
    DomainError,
    Instance,
    ScenarioSet,
    Solution,
    evaluate_per_scenario,
)
from .scenario import ScenarioConfig, build_scenario_set
from .vns import VnsConfig, configured_for, vns_solve


@dataclass(frozen=True)
class SAAConfig:
    replications: int = 5
    m: int = 30
    m_eval: int = 500
    seed: int = 0
    solver: VnsConfig = field(default_factory=VnsConfig)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    jobs: int = 1

    def __post_init__(self):
        if self.replications < 1 or self.m < 1:
            raise DomainError("need at least one replication and one training sample")
        if self.m_eval < self.m:
            raise DomainError("evaluation sample size must be >= training size")


@dataclass
class Replication:
    solution: Solution
    training_cost: float
    seed: int


@dataclass
class SAAReport:
    replications: list[Replication]
    lb_mean: float
    lb_variance: float
    ub_costs: list[float]
    ub_variance: float
    selected: int
    gap: float
    gap_variance: float

    def summary(self) -> str:
        lines = [
            f"{'rep':>4} {'training cost':>14} {'eval cost':>12}",
        ]
        for i, (rep, ub) in enumerate(zip(self.replications, self.ub_costs)):
            mark = " *" if i == self.selected else ""
            lines.append(f"{i:>4} {rep.training_cost:>14.4f} {ub:>12.4f}{mark}")
        lines += [
            f"lower bound mean     {self.lb_mean:.4f}  (variance {self.lb_variance:.6g})",
            f"selected upper bound {self.ub_costs[self.selected]:.4f}  (variance {self.ub_variance:.6g})",
            f"optimality gap       {self.gap:.4f}  (variance {self.gap_variance:.6g})",
        ]
        return "\n".join(lines)


def cross_evaluate(
    solution: Solution, eval_set: ScenarioSet, instance: Instance
) -> tuple[float, np.ndarray]:
    """Average cost of a fixed solution on an evaluation set, plus per-scenario totals.

    The schedule is not re-optimized; scenarios where it is infeasible simply
    realize late service starts.
    """
    breakdown, per_scenario = evaluate_per_scenario(solution, instance, eval_set)
    return breakdown.total, per_scenario


def _mean_estimator_variance(values: np.ndarray) -> float:
    n = values.size
    if n < 2:
        return 0.0
    mean = values.mean()
    return float(((values - mean) ** 2).sum() / (n * (n - 1)))


def _solve_replication(args) -> tuple[Solution, float]:
    instance, config, scen_seed, vns_seed = args
    training = build_scenario_set(instance, config.m, scen_seed, config.scenario)
    solver = configured_for(instance, config.solver, seed=vns_seed)
    solution, _ = vns_solve(instance, training, solver)
    cost, _ = cross_evaluate(solution, training, instance)
    return solution, cost


def run_saa(
    instance: Instance,
    config: SAAConfig,
    training_sets: list[ScenarioSet] | None = None,
    eval_set: ScenarioSet | None = None,
) -> SAAReport:
    """Full replication procedure; pre-built scenario sets may be injected."""
    q = config.replications
    seeds = np.random.SeedSequence(config.seed).generate_state(2 * q + 1, dtype=np.uint64)
    scen_seeds = [int(s) for s in seeds[:q]]
    vns_seeds = [int(s) for s in seeds[q : 2 * q]]
    eval_seed = int(seeds[2 * q])

    if training_sets is not None:
        if len(training_sets) != q:
            raise DomainError("one training set per replication required")
        scen_seeds = [s.seed for s in training_sets]
        results = []
        for sset, vseed in zip(training_sets, vns_seeds):
            solver = configured_for(instance, config.solver, seed=vseed)
            solution, _ = vns_solve(instance, sset, solver)
            results.append((solution, cross_evaluate(solution, sset, instance)[0]))
    else:
        tasks = [(instance, config, s, v) for s, v in zip(scen_seeds, vns_seeds)]
        if config.jobs > 1:
            with ProcessPoolExecutor(max_workers=config.jobs) as pool:
                results = list(pool.map(_solve_replication, tasks))
        else:
            results = [_solve_replication(t) for t in tasks]

    replications = [
        Replication(sol, cost, seed) for (sol, cost), seed in zip(results, scen_seeds)
    ]
    training_costs = np.array([r.training_cost for r in replications])
    lb_mean = float(training_costs.mean())
    lb_variance = _mean_estimator_variance(training_costs)

    if eval_set is None:
        eval_set = build_scenario_set(instance, config.m_eval, eval_seed, config.scenario)
    ub_costs = []
    per_scenario_costs = []
    for rep in replications:
        total, per_scenario = cross_evaluate(rep.solution, eval_set, instance)
        ub_costs.append(total)
        per_scenario_costs.append(per_scenario)
    selected = int(np.argmin(ub_costs))
    ub_variance = _mean_estimator_variance(per_scenario_costs[selected])
    gap = ub_costs[selected] - lb_mean
    return SAAReport(
        replications=replications,
        lb_mean=lb_mean,
        lb_variance=lb_variance,
        ub_costs=ub_costs,
        ub_variance=ub_variance,
        selected=selected,
        gap=gap,
        gap_variance=lb_variance + ub_variance,
    )


def relative_gap(det_cost: float, stochastic_cost: float) -> float:
    """Fractional cost advantage of the stochastic solution over the deterministic one."""
    if det_cost <= 0:
        raise DomainError("deterministic cost must be positive")
    return (det_cost - stochastic_cost) / det_cost
