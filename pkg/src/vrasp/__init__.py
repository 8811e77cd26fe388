"""Solver kit for joint caregiver routing and appointment scheduling.

Deterministic and sampled-stochastic cost models, a variable neighborhood
search heuristic with tabu-search improvement, sample-average-approximation
bound estimation, exact oracles for small instances, and an LP exporter.
"""

from .bench import BenchConfig, generate_instance, run_bench
from .construct import build_initial
from .domain import (
    CanonicalEvaluator,
    Client,
    CostBreakdown,
    CostParams,
    DomainError,
    Instance,
    Route,
    RouteTrace,
    Scenario,
    ScenarioSet,
    Solution,
    canonical_schedule,
    evaluate,
    evaluate_deterministic,
    simulate_route,
    travel_cost,
    validate_solution,
)
from .neighborhoods import shake
from .oracle import LpExportConfig, enumerate_optimal, export_lp, grid_schedule_search
from .saa import SAAConfig, SAAReport, cross_evaluate, relative_gap, run_saa
from .scenario import (
    ScenarioConfig,
    build_scenario,
    build_scenario_set,
    mean_scenario,
)
from .tabu import tabu_search
from .vns import SearchLog, VnsConfig, vns_solve

__all__ = [
    "BenchConfig",
    "CanonicalEvaluator",
    "Client",
    "CostBreakdown",
    "CostParams",
    "DomainError",
    "Instance",
    "LpExportConfig",
    "Route",
    "RouteTrace",
    "SAAConfig",
    "SAAReport",
    "Scenario",
    "ScenarioConfig",
    "ScenarioSet",
    "SearchLog",
    "Solution",
    "VnsConfig",
    "build_initial",
    "build_scenario",
    "build_scenario_set",
    "canonical_schedule",
    "cross_evaluate",
    "enumerate_optimal",
    "evaluate",
    "evaluate_deterministic",
    "export_lp",
    "generate_instance",
    "grid_schedule_search",
    "mean_scenario",
    "relative_gap",
    "run_bench",
    "run_saa",
    "shake",
    "simulate_route",
    "tabu_search",
    "travel_cost",
    "validate_solution",
    "vns_solve",
]
