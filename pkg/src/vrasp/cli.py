"""Command-line driver: generate, solve, evaluate, replicate, export, benchmark.

Exit codes: 0 success, 2 usage error, 3 validation error (bad file content or
invalid solution), 4 I/O error.  All randomness flows from the --seed flags.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import bench as bench_mod
from . import io as vio
from .domain import DomainError, ScenarioSet, evaluate_per_scenario, validate_solution
from .oracle import LpExportConfig, export_lp
from .plots import plot_convergence, plot_routes
from .saa import SAAConfig, run_saa
from .scenario import build_scenario_set, mean_scenario
from .vns import VnsConfig, vns_solve

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_IO = 4


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _solver_from_args(args) -> VnsConfig:
    return VnsConfig(
        max_iters=args.tau,
        removal_fraction=args.r,
        tenure_min=args.tenure_min,
        tenure_max=args.tenure_max,
        seed=args.seed,
        time_limit=args.time_limit,
    )


def _add_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--tau", type=int, default=200, help="outer search iterations")
    p.add_argument("--r", type=float, default=0.2, help="removal fraction per shake")
    p.add_argument("--tenure-min", type=int, default=5)
    p.add_argument("--tenure-max", type=int, default=10)
    p.add_argument("--time-limit", type=float, default=None, help="wall-clock cap in seconds")


def _apply_penalty_mode(instance, mode: str | None):
    if mode is None:
        return instance
    instance.params = dataclasses.replace(instance.params, penalty_mode=mode)
    return instance


def cmd_gen(args) -> int:
    instance = bench_mod.generate_instance(args.n, args.seed)
    path = vio.write_instance(instance, args.out)
    print(f"wrote {path} ({instance.n} clients, {instance.caregiver_count} caregivers)")
    return EXIT_OK


def _training_set(instance, args) -> ScenarioSet:
    training = build_scenario_set(instance, args.m, args.seed)
    if args.model == "det":
        return ScenarioSet([mean_scenario(training)], seed=args.seed, label="mean")
    return training


def cmd_solve(args) -> int:
    instance = _apply_penalty_mode(vio.read_instance(args.instance), args.penalty_mode)
    scenarios = _training_set(instance, args)
    solution, log = vns_solve(instance, scenarios, _solver_from_args(args))
    out = Path(args.out)
    vio.write_solution(solution, out)
    log_path = args.log or out.with_suffix(".log.csv")
    log.to_csv(log_path)
    if args.plot:
        plot_routes(instance, solution, args.plot)
        plot_convergence(log, Path(args.plot).with_suffix(".convergence.png"))
    breakdown, _ = evaluate_per_scenario(solution, instance, scenarios)
    print(json.dumps(breakdown.as_dict(), indent=2, sort_keys=True))
    print(f"wrote {out} and {log_path}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    instance = _apply_penalty_mode(vio.read_instance(args.instance), args.penalty_mode)
    solution = vio.read_solution(args.solution)
    if args.scenarios:
        scenarios = vio.read_scenario_set(args.scenarios)
    else:
        scenarios = build_scenario_set(instance, args.m, args.seed)
    violations = validate_solution(solution, instance)
    if violations:
        raise DomainError("invalid solution: " + "; ".join(violations))
    breakdown, _ = evaluate_per_scenario(solution, instance, scenarios)
    print(json.dumps(breakdown.as_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_saa(args) -> int:
    instance = _apply_penalty_mode(vio.read_instance(args.instance), args.penalty_mode)
    config = SAAConfig(
        replications=args.q,
        m=args.m,
        m_eval=args.m_eval,
        seed=args.seed,
        solver=_solver_from_args(args),
        jobs=args.jobs,
    )
    report = run_saa(instance, config)
    vio.write_saa_report(report, args.out)
    print(report.summary())
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_export_lp(args) -> int:
    instance = _apply_penalty_mode(vio.read_instance(args.instance), args.penalty_mode)
    scenarios = build_scenario_set(instance, args.m, args.seed)
    path = export_lp(
        instance, scenarios, LpExportConfig(model=args.model, big_m=args.big_m, path=args.out)
    )
    print(f"wrote {path}")
    return EXIT_OK


def cmd_bench(args) -> int:
    doc = vio.load_json(args.config)
    solver_doc = doc.get("solver", {})
    solver = VnsConfig(
        max_iters=int(solver_doc.get("tau", 200)),
        removal_fraction=float(solver_doc.get("r", 0.2)),
        tenure_min=int(solver_doc.get("tenure_min", 5)),
        tenure_max=int(solver_doc.get("tenure_max", 10)),
    )
    try:
        config = bench_mod.BenchConfig(
            sizes=[int(v) for v in doc["sizes"]],
            instances_per_size=int(doc.get("instances_per_size", 10)),
            sample_sizes=[int(v) for v in doc.get("sample_sizes", [30])],
            m_eval=int(doc.get("m_eval", 500)),
            seed=int(doc.get("seed", 0)),
            output_dir=args.out or doc.get("out", "bench_out"),
            solver=solver,
            mode=doc.get("mode", "det_vs_saa"),
            penalty_mode=doc.get("penalty_mode", "tardiness"),
            jobs=args.jobs,
        )
    except KeyError as exc:
        raise DomainError(f"bench config is missing {exc.args[0]!r}") from exc
    written = bench_mod.run_bench(config)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vrasp",
        description="Joint caregiver routing and appointment scheduling solver kit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random instance file")
    p.add_argument("--n", type=positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve an instance and write solution + search log")
    p.add_argument("--instance", required=True)
    p.add_argument("--model", choices=["det", "saa"], default="saa")
    p.add_argument("--m", type=int, default=30, help="training scenario count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--penalty-mode", choices=["earliness", "tardiness", "both"], default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--log", default=None, help="search log CSV path")
    p.add_argument("--plot", default=None, help="also render a route map PNG here")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("evaluate", help="cost breakdown of a solution file")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--scenarios", default=None, help="scenario set JSON (else --seed/--m)")
    p.add_argument("--m", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--penalty-mode", choices=["earliness", "tardiness", "both"], default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("saa", help="replication procedure with bound estimates")
    p.add_argument("--instance", required=True)
    p.add_argument("--q", type=int, default=5, help="replication count")
    p.add_argument("--m", type=int, default=30)
    p.add_argument("--m-eval", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--penalty-mode", choices=["earliness", "tardiness", "both"], default=None)
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_saa)

    p = sub.add_parser("export-lp", help="write the model as a CPLEX-style LP file")
    p.add_argument("--instance", required=True)
    p.add_argument("--model", choices=["det", "saa"], default="det")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--big-m", type=float, default=None)
    p.add_argument("--penalty-mode", choices=["earliness", "tardiness", "both"], default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_lp)

    p = sub.add_parser("bench", help="run the benchmark harness from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="override the output directory")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
