"""JSON schemas for instances, solutions, scenario sets and SAA reports.

All documents carry a ``format_version`` field.  Floats round-trip exactly
(json uses repr), so re-reading a file reproduces the in-memory values bit
for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .domain import (
    Client,
    CostParams,
    DomainError,
    Instance,
    Route,
    Scenario,
    ScenarioSet,
    Solution,
)
from .saa import SAAReport

FORMAT_VERSION = 1


def load_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def dump_json(doc: dict, path) -> Path:
    path = Path(path)
    try:
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _require(doc: dict, key: str, context: str):
    if key not in doc:
        raise DomainError(f"{context}: missing required field {key!r}")
    return doc[key]


def instance_to_dict(instance: Instance) -> dict:
    p = instance.params
    return {
        "format_version": FORMAT_VERSION,
        "depot": list(instance.depot_xy),
        "clients": [{"id": c.id, "x": c.x, "y": c.y} for c in instance.clients],
        "caregivers": instance.caregiver_count,
        "params": {
            "c_fixed": p.c_fixed,
            "c_overtime": p.c_overtime,
            "c_wait": p.c_wait,
            "travel_cost_factor": p.travel_cost_factor,
            "shift_length": p.shift_length,
            "penalty_mode": p.penalty_mode,
            "c_tardy_extra": p.c_tardy_extra,
        },
    }


def instance_from_dict(doc: dict) -> Instance:
    params = _require(doc, "params", "instance")
    for key in ("c_fixed", "c_overtime", "c_wait", "travel_cost_factor", "shift_length"):
        _require(params, key, "instance params")
    return Instance(
        clients=[
            Client(int(c["id"]), float(c["x"]), float(c["y"]))
            for c in _require(doc, "clients", "instance")
        ],
        depot_xy=tuple(_require(doc, "depot", "instance")),
        caregiver_count=int(_require(doc, "caregivers", "instance")),
        params=CostParams(
            c_fixed=float(params["c_fixed"]),
            c_overtime=float(params["c_overtime"]),
            c_wait=float(params["c_wait"]),
            travel_cost_factor=float(params["travel_cost_factor"]),
            shift_length=float(params["shift_length"]),
            penalty_mode=params.get("penalty_mode", "earliness"),
            c_tardy_extra=float(params.get("c_tardy_extra", 0.0)),
        ),
    )


def write_instance(instance: Instance, path) -> Path:
    return dump_json(instance_to_dict(instance), path)


def read_instance(path) -> Instance:
    return instance_from_dict(load_json(path))


def solution_to_dict(solution: Solution) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "routes": [
            {"caregiver": r.caregiver, "visits": list(r.visits)} for r in solution.routes
        ],
        "schedule": {str(cid): t for cid, t in sorted(solution.schedule.items())},
    }


def solution_from_dict(doc: dict) -> Solution:
    routes = [
        Route(int(r["caregiver"]), [int(v) for v in r["visits"]])
        for r in _require(doc, "routes", "solution")
    ]
    schedule = {int(k): float(v) for k, v in _require(doc, "schedule", "solution").items()}
    return Solution(routes, schedule)


def write_solution(solution: Solution, path) -> Path:
    return dump_json(solution_to_dict(solution), path)


def read_solution(path) -> Solution:
    return solution_from_dict(load_json(path))


def scenario_set_to_dict(scenario_set: ScenarioSet) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "seed": scenario_set.seed,
        "label": scenario_set.label,
        "scenarios": [
            {
                "travel_time": s.travel_time.tolist(),
                "service_time": s.service_time.tolist(),
            }
            for s in scenario_set.scenarios
        ],
    }


def scenario_set_from_dict(doc: dict) -> ScenarioSet:
    scenarios = [
        Scenario(
            travel_time=np.asarray(s["travel_time"], dtype=float),
            service_time=np.asarray(s["service_time"], dtype=float),
        )
        for s in _require(doc, "scenarios", "scenario set")
    ]
    return ScenarioSet(scenarios, seed=int(doc.get("seed", 0)), label=doc.get("label", ""))


def write_scenario_set(scenario_set: ScenarioSet, path) -> Path:
    return dump_json(scenario_set_to_dict(scenario_set), path)


def read_scenario_set(path) -> ScenarioSet:
    return scenario_set_from_dict(load_json(path))


def saa_report_to_dict(report: SAAReport) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "replications": [
            {
                "solution": solution_to_dict(rep.solution),
                "training_cost": rep.training_cost,
                "seed": rep.seed,
            }
            for rep in report.replications
        ],
        "lb_mean": report.lb_mean,
        "lb_variance": report.lb_variance,
        "ub_costs": list(report.ub_costs),
        "ub_variance": report.ub_variance,
        "selected": report.selected,
        "gap": report.gap,
        "gap_variance": report.gap_variance,
    }


def write_saa_report(report: SAAReport, path) -> Path:
    return dump_json(saa_report_to_dict(report), path)
