"""Instance generation and the benchmark harness.

Generates random instances on the unit square scaled to [0, 50], then runs
two comparison protocols at desk scale: deterministic-model solutions against
sampled-model solutions under shared out-of-sample evaluation, and heuristic
solutions against the exhaustive oracle on small instances.  Results land in
CSV reports with companion figures.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .domain import (
    Client,
    CostParams,
    DomainError,
    Instance,
    ScenarioSet,
    evaluate_per_scenario,
)
from .oracle import ENUMERATION_LIMIT, enumerate_optimal
from .plots import plot_convergence, plot_gap_bars, plot_routes
from .saa import relative_gap
from .scenario import ScenarioConfig, build_scenario_set, mean_scenario
from .vns import VnsConfig, vns_solve

CSV_COLUMNS = [
    "instance_id",
    "n",
    "k",
    "m",
    "model",
    "cost_fixed",
    "cost_travel",
    "cost_wait",
    "cost_overtime",
    "cost_total",
    "gap",
    "seconds",
    "seed",
]


def generate_instance(n: int, seed: int) -> Instance:
    """Random instance: depot at the origin, clients uniform in [0, 50]^2.

    Caregiver count is ceil(n / 6); cost rates follow the standard benchmark
    parameterization (fixed 100, overtime 1/min, waiting 2/min, travel 0.5
    per distance unit, 480-minute shift).
    """
    if n < 1:
        raise DomainError("need at least one client")
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0.0, 50.0, size=(n, 2))
    clients = [Client(i + 1, float(x), float(y)) for i, (x, y) in enumerate(xy)]
    return Instance(
        clients=clients,
        depot_xy=(0.0, 0.0),
        caregiver_count=math.ceil(n / 6),
        params=CostParams(
            c_fixed=100.0,
            c_overtime=1.0,
            c_wait=2.0,
            travel_cost_factor=0.5,
            shift_length=480.0,
        ),
    )


@dataclass
class BenchRow:
    instance_id: str
    n: int
    k: int
    m: int
    model: str
    cost_fixed: float | None
    cost_travel: float | None
    cost_wait: float | None
    cost_overtime: float | None
    cost_total: float | None
    gap: float | None
    seconds: float
    seed: int
    note: str = ""

    def key(self) -> tuple:
        return (self.instance_id, self.model, self.m)

    def as_csv(self) -> list:
        def num(v):
            return "" if v is None else repr(v)

        return [
            self.instance_id,
            self.n,
            self.k,
            self.m,
            self.model,
            num(self.cost_fixed),
            num(self.cost_travel),
            num(self.cost_wait),
            num(self.cost_overtime),
            num(self.cost_total),
            num(self.gap),
            f"{self.seconds:.3f}",
            self.seed,
        ]


@dataclass(frozen=True)
class BenchConfig:
    """Suite selection plus the waiting-time reading applied to the instances.

    The deterministic-vs-stochastic comparison only shows the stochastic
    model's advantage when late service starts are what costs money, so the
    harness runs its instances in "tardiness" mode by default; pass
    "earliness" to study the equation-literal reading instead.
    """

    sizes: list[int] = field(default_factory=lambda: [5, 10])
    instances_per_size: int = 10
    sample_sizes: list[int] = field(default_factory=lambda: [30])
    m_eval: int = 500
    seed: int = 0
    output_dir: str | Path = "bench_out"
    solver: VnsConfig = field(default_factory=lambda: VnsConfig(max_iters=200))
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    mode: str = "det_vs_saa"
    penalty_mode: str = "tardiness"
    jobs: int = 1

    def __post_init__(self):
        if not self.sizes or self.instances_per_size < 1:
            raise DomainError("sizes must be non-empty and counts >= 1")
        if self.mode not in ("det_vs_saa", "exact_vs_vns", "both"):
            raise DomainError("mode must be det_vs_saa, exact_vs_vns or both")


def _breakdown_row(instance_id, instance, m, model, breakdown, gap, seconds, seed):
    return BenchRow(
        instance_id,
        instance.n,
        instance.caregiver_count,
        m,
        model,
        breakdown.fixed,
        breakdown.travel,
        breakdown.wait_penalty,
        breakdown.overtime_penalty,
        breakdown.total,
        gap,
        seconds,
        seed,
    )


def compare_det_vs_stochastic(
    instance: Instance,
    m: int,
    m_eval: int,
    seed: int,
    solver: VnsConfig,
    scenario_config: ScenarioConfig | None = None,
    instance_id: str = "inst",
) -> tuple[list[BenchRow], dict]:
    """Solve both models, cross-evaluate on one shared evaluation set.

    The deterministic model sees the entrywise mean of the training set; the
    stochastic model sees the training set itself.  The gap column is the
    relative saving of the stochastic solution.
    """
    scenario_config = scenario_config or ScenarioConfig()
    seeds = np.random.SeedSequence(seed).generate_state(4, dtype=np.uint64)
    training = build_scenario_set(instance, m, int(seeds[0]), scenario_config)
    mean_set = ScenarioSet([mean_scenario(training)], seed=training.seed, label="mean")
    eval_set = build_scenario_set(instance, m_eval, int(seeds[1]), scenario_config)

    t0 = time.perf_counter()
    det_solution, det_log = vns_solve(instance, mean_set, replace(solver, seed=int(seeds[2])))
    det_seconds = time.perf_counter() - t0
    t0 = time.perf_counter()
    sto_solution, sto_log = vns_solve(instance, training, replace(solver, seed=int(seeds[3])))
    sto_seconds = time.perf_counter() - t0

    det_eval, _ = evaluate_per_scenario(det_solution, instance, eval_set)
    sto_eval, _ = evaluate_per_scenario(sto_solution, instance, eval_set)
    gap = relative_gap(det_eval.total, sto_eval.total)
    rows = [
        _breakdown_row(instance_id, instance, m, "det", det_eval, gap, det_seconds, seed),
        _breakdown_row(instance_id, instance, m, "saa", sto_eval, gap, sto_seconds, seed),
    ]
    extras = {
        "det_solution": det_solution,
        "sto_solution": sto_solution,
        "det_log": det_log,
        "sto_log": sto_log,
        "gap": gap,
    }
    return rows, extras


def compare_exact_vs_heuristic(
    instance: Instance,
    scenarios: ScenarioSet,
    solver: VnsConfig,
    instance_id: str = "inst",
    seed: int = 0,
) -> tuple[list[BenchRow], dict]:
    """Oracle cost against heuristic cost on one scenario set.

    The gap (heuristic - oracle) / heuristic is never negative.  Instances
    over the enumeration guard produce a single skipped row with the reason.
    """
    if instance.n > ENUMERATION_LIMIT:
        row = BenchRow(
            instance_id,
            instance.n,
            instance.caregiver_count,
            len(scenarios),
            "skipped",
            None,
            None,
            None,
            None,
            None,
            None,
            0.0,
            seed,
            note=f"n={instance.n} exceeds enumeration limit {ENUMERATION_LIMIT}",
        )
        return [row], {"skipped": True}
    t0 = time.perf_counter()
    _, oracle_cost = enumerate_optimal(instance, scenarios)
    oracle_seconds = time.perf_counter() - t0
    t0 = time.perf_counter()
    solution, log = vns_solve(instance, scenarios, solver)
    vns_seconds = time.perf_counter() - t0
    breakdown, _ = evaluate_per_scenario(solution, instance, scenarios)
    gap = (breakdown.total - oracle_cost) / breakdown.total
    m = len(scenarios)
    rows = [
        BenchRow(
            instance_id,
            instance.n,
            instance.caregiver_count,
            m,
            "oracle",
            None,
            None,
            None,
            None,
            oracle_cost,
            gap,
            oracle_seconds,
            seed,
        ),
        _breakdown_row(instance_id, instance, m, "vns", breakdown, gap, vns_seconds, seed),
    ]
    return rows, {"solution": solution, "log": log, "gap": gap}


def _read_existing(path: Path) -> dict[tuple, list]:
    rows = {}
    if path.exists():
        with open(path, newline="") as fh:
            for record in csv.DictReader(fh):
                key = (record["instance_id"], record["model"], int(record["m"]))
                rows[key] = [record.get(c, "") for c in CSV_COLUMNS]
    return rows


def _write_rows(path: Path, rows: dict[tuple, list]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for key in sorted(rows):
            writer.writerow(rows[key])


def _det_vs_sto_task(args):
    instance, m, config, seed, instance_id = args
    return compare_det_vs_stochastic(
        instance, m, config.m_eval, seed, config.solver, config.scenario, instance_id
    )


def run_bench(config: BenchConfig) -> list[Path]:
    """Run the configured suites; returns the written report and figure paths.

    Rows already present in an output CSV are not recomputed, so an
    interrupted run resumes where it stopped.
    """
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    root = np.random.SeedSequence(config.seed)
    size_seeds = root.generate_state(len(config.sizes) * config.instances_per_size * 2, dtype=np.uint64)
    seed_idx = 0

    for n in config.sizes:
        instances = []
        for i in range(config.instances_per_size):
            gen_seed = int(size_seeds[seed_idx])
            run_seed = int(size_seeds[seed_idx + 1])
            seed_idx += 2
            instance = generate_instance(n, gen_seed)
            instance.params = dataclasses.replace(
                instance.params, penalty_mode=config.penalty_mode
            )
            instances.append((f"n{n}_i{i}", instance, run_seed))

        if config.mode in ("det_vs_saa", "both"):
            for m in config.sample_sizes:
                path = out / f"det_vs_saa_n{n}_m{m}.csv"
                existing = _read_existing(path)
                tasks = []
                for instance_id, instance, run_seed in instances:
                    if (instance_id, "saa", m) in existing and (instance_id, "det", m) in existing:
                        continue
                    tasks.append((instance, m, config, run_seed, instance_id))
                if config.jobs > 1 and len(tasks) > 1:
                    with ProcessPoolExecutor(max_workers=config.jobs) as pool:
                        results = list(pool.map(_det_vs_sto_task, tasks))
                else:
                    results = [_det_vs_sto_task(t) for t in tasks]
                gaps, labels = [], []
                for task, (rows, extras) in zip(tasks, results):
                    for row in rows:
                        existing[row.key()] = row.as_csv()
                    if task[4] == tasks[0][4]:
                        plot_routes(
                            task[0],
                            extras["sto_solution"],
                            out / f"routes_n{n}_m{m}.png",
                            title=f"stochastic solution, {task[4]}",
                        )
                        plot_convergence(
                            extras["sto_log"],
                            out / f"convergence_n{n}_m{m}.png",
                            title=f"stochastic solve, {task[4]}",
                        )
                _write_rows(path, existing)
                written.append(path)
                for instance_id, _, _ in instances:
                    record = existing.get((instance_id, "saa", m))
                    if record and record[CSV_COLUMNS.index("gap")]:
                        labels.append(instance_id)
                        gaps.append(float(record[CSV_COLUMNS.index("gap")]))
                if gaps:
                    written.append(
                        plot_gap_bars(
                            labels,
                            gaps,
                            out / f"gap_n{n}_m{m}.png",
                            title=f"relative saving of the stochastic model (n={n}, m={m})",
                        )
                    )

        if config.mode in ("exact_vs_vns", "both"):
            m = config.sample_sizes[0]
            path = out / f"exact_vs_vns_n{n}_m{m}.csv"
            existing = _read_existing(path)
            labels, gaps = [], []
            for instance_id, instance, run_seed in instances:
                if (instance_id, "vns", m) not in existing and (instance_id, "skipped", m) not in existing:
                    scenarios = build_scenario_set(instance, m, run_seed, config.scenario)
                    rows, _ = compare_exact_vs_heuristic(
                        instance,
                        scenarios,
                        replace(config.solver, seed=run_seed),
                        instance_id,
                        run_seed,
                    )
                    for row in rows:
                        existing[row.key()] = row.as_csv()
                record = existing.get((instance_id, "vns", m))
                if record and record[CSV_COLUMNS.index("gap")]:
                    labels.append(instance_id)
                    gaps.append(float(record[CSV_COLUMNS.index("gap")]))
            _write_rows(path, existing)
            written.append(path)
            if gaps:
                written.append(
                    plot_gap_bars(
                        labels,
                        gaps,
                        out / f"oracle_gap_n{n}_m{m}.png",
                        title=f"heuristic optimality gap (n={n}, m={m})",
                    )
                )
    return written
