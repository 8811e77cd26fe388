"""Ground truth for small instances plus an LP-file exporter.

``enumerate_optimal`` exhausts every client-to-caregiver partition and visit
order (canonical schedules make the per-route schedule choice free).
``grid_schedule_search`` brute-forces schedules for tiny routes with its own
scalar simulator, independent of the vectorized evaluation path, so it can
arbitrate the canonical-schedule optimality claim.  ``export_lp`` writes the
model as a CPLEX-style LP text file for external exact solvers; the package
deliberately embeds no MILP solver itself.

LP grammar emitted (and accepted by ``parse_lp``)::

    Minimize
     obj: <term> [+|- <term> ...]
    Subject To
     <name>: <terms> <=|>=|= <number>
    Bounds
     <var> = <number>            (only used to fix variables)
    Binaries
     <var> <var> ...
    End

where ``<term>`` is ``[number] <var>``.  Continuation lines are indented; all
unlisted continuous variables default to [0, +inf).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

from .domain import (
    CanonicalEvaluator,
    DomainError,
    Instance,
    Route,
    ScenarioSet,
    Solution,
)
from .scenario import mean_scenario

ENUMERATION_LIMIT = 8


def enumerate_optimal(
    instance: Instance, scenarios: ScenarioSet
) -> tuple[Solution, float]:
    """Globally optimal solution by exhaustive enumeration (guarded to small n).

    Ties are broken towards the lexicographically smallest sorted tuple of
    route visit tuples.
    """
    n = instance.n
    if n > ENUMERATION_LIMIT:
        raise DomainError(
            f"exhaustive enumeration refuses n={n} > {ENUMERATION_LIMIT}"
        )
    ev = CanonicalEvaluator(instance, scenarios)
    best_order: dict[frozenset[int], tuple[float, tuple[int, ...]]] = {}

    def best_route(block: frozenset[int]) -> tuple[float, tuple[int, ...]]:
        cached = best_order.get(block)
        if cached is None:
            best_cost, best_perm = math.inf, None
            for perm in itertools.permutations(sorted(block)):
                cost = ev.route_cost(perm)
                if cost < best_cost:
                    best_cost, best_perm = cost, perm
            cached = best_order[block] = (best_cost, best_perm)
        return cached

    clients = [c.id for c in instance.clients]
    best = (math.inf, None)

    def scan(idx: int, blocks: list[list[int]]):
        nonlocal best
        if idx == len(clients):
            cost = 0.0
            encoding = []
            for block in blocks:
                c, perm = best_route(frozenset(block))
                cost += c
                encoding.append(perm)
            encoding = tuple(sorted(encoding))
            if cost < best[0] - 1e-12 or (
                abs(cost - best[0]) <= 1e-12 and (best[1] is None or encoding < best[1])
            ):
                best = (cost, encoding)
            return
        client = clients[idx]
        for block in blocks:
            block.append(client)
            scan(idx + 1, blocks)
            block.pop()
        if len(blocks) < instance.caregiver_count:
            blocks.append([client])
            scan(idx + 1, blocks)
            blocks.pop()

    scan(0, [])
    cost, encoding = best
    solution = ev.build_solution([list(v) for v in encoding])
    return solution, cost


def _scalar_route_cost(
    visits: list[int],
    starts: list[float],
    instance: Instance,
    scenarios: ScenarioSet,
) -> float:
    """Plain-float route cost used by the grid oracle; no shared numpy path."""
    params = instance.params
    rate_early, rate_late = params.wait_rates()
    dest = instance.depot_return
    dist = instance.distances
    path = [0, *visits, dest]
    travel = params.travel_cost_factor * sum(
        float(dist[path[k], path[k + 1]]) for k in range(len(path) - 1)
    )
    penalty = 0.0
    for scen in scenarios.scenarios:
        t = scen.travel_time
        ts = scen.service_time
        clock, prev = 0.0, 0
        early = late = 0.0
        for v, s in zip(visits, starts):
            a = clock + float(t[prev, v])
            early += max(s - a, 0.0)
            late += max(a - s, 0.0)
            clock = max(a, s) + float(ts[v])
            prev = v
        ret = clock + float(t[prev, dest])
        penalty += (
            rate_early * early
            + rate_late * late
            + params.c_overtime * max(ret - params.shift_length, 0.0)
        )
    return params.c_fixed + travel + penalty / len(scenarios)


def grid_schedule_search(
    route: Route,
    instance: Instance,
    scenarios: ScenarioSet,
    grid_step: float = 1.0,
    max_offset: float = 60.0,
) -> tuple[dict[int, float], float]:
    """Exhaustive schedule search for a short route over a feasible offset grid.

    Builds its own minimal feasible schedule by scalar recursion, then tries
    every non-decreasing per-client offset vector on the grid (non-decreasing
    offsets are exactly the grid points that keep the inter-visit spacing
    feasible in every scenario).  Returns the cheapest schedule found.
    """
    if grid_step <= 0:
        raise DomainError("grid_step must be positive")
    if len(route.visits) > 3:
        raise DomainError("grid search is limited to routes of length <= 3")
    visits = list(route.visits)
    if not visits:
        return {}, 0.0
    base = []
    prev, t = 0, 0.0
    for v in visits:
        gap = max(
            float(s.service_time[prev]) + float(s.travel_time[prev, v])
            for s in scenarios.scenarios
        )
        t += gap
        base.append(t)
        prev = v
    steps = int(math.floor(max_offset / grid_step + 1e-9))
    offsets = [k * grid_step for k in range(steps + 1)]
    best_cost, best_starts = math.inf, None
    for combo in itertools.combinations_with_replacement(offsets, len(visits)):
        starts = [b + d for b, d in zip(base, combo)]
        cost = _scalar_route_cost(visits, starts, instance, scenarios)
        if cost < best_cost:
            best_cost, best_starts = cost, starts
    return dict(zip(visits, best_starts)), best_cost


@dataclass(frozen=True)
class LpExportConfig:
    """Model selection and big-M for the LP writer.

    ``model`` is "det" (single mean scenario) or "saa" (all scenarios).  When
    ``big_m`` is unset a provable horizon bound is used: the shift length plus
    the worst total service time plus (n + 1) worst single hops.
    """

    model: str = "det"
    big_m: float | None = None
    path: str | Path | None = None

    def __post_init__(self):
        if self.model not in ("det", "saa"):
            raise DomainError("model must be 'det' or 'saa'")
        if self.big_m is not None and self.big_m <= 0:
            raise DomainError("big_m must be positive")


def horizon_big_m(instance: Instance, scenarios: ScenarioSet) -> float:
    """Upper bound on any feasible time value in the model."""
    worst_service = float(scenarios.service.max(axis=0)[1 : instance.n + 1].sum())
    worst_hop = float(scenarios.travel.max())
    return instance.params.shift_length + worst_service + (instance.n + 1) * worst_hop


def _fmt(value: float) -> str:
    return f"{value:.12g}"


class _LpWriter:
    def __init__(self):
        self.lines: list[str] = []

    def section(self, title: str):
        self.lines.append(title)

    def row(self, name: str, terms: list[tuple[float, str]], sense: str = "", rhs: float | None = None):
        parts = [f" {name}:"]
        for coef, var in terms:
            if coef == 0:
                continue
            sign = "-" if coef < 0 else "+"
            mag = abs(coef)
            term = var if mag == 1 else f"{_fmt(mag)} {var}"
            parts.append(f"{sign} {term}")
        if len(parts) == 1:
            parts.append("+ 0 " + terms[0][1])
        if sense:
            parts.append(f"{sense} {_fmt(rhs)}")
        line = " ".join(parts)
        # keep lines comfortably below classic LP readers' limits
        while len(line) > 240:
            cut = line.rfind(" +", 0, 240)
            cut = max(cut, line.rfind(" -", 0, 240))
            self.lines.append(line[:cut])
            line = "  " + line[cut:]
        self.lines.append(line)

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def build_lp(instance: Instance, scenarios: ScenarioSet, config: LpExportConfig) -> str:
    """Render the routing-and-scheduling model as LP text.

    The max() in the service-begin definition becomes an epigraph (b >= a,
    b >= s); arrivals on active arcs are pinned with two-sided big-M rows so
    the solver cannot inflate them to dodge waiting penalties; waiting uses
    the penalty mode's linear epigraph; overtime follows the schedule-based
    return expression.
    """
    n = instance.n
    dest = instance.depot_return
    k_count = instance.caregiver_count
    params = instance.params
    if config.model == "det":
        tables = ScenarioSet([mean_scenario(scenarios)], seed=scenarios.seed, label="mean")
    else:
        tables = scenarios
    m_count = len(tables)
    big_m = config.big_m if config.big_m is not None else horizon_big_m(instance, tables)
    clients = list(range(1, n + 1))
    v1 = [0] + clients
    v2 = clients + [dest]
    all_nodes = list(range(instance.n_nodes))
    ks = list(range(1, k_count + 1))
    ms = list(range(1, m_count + 1))

    def x(i, j, k):
        return f"x_{i}_{j}_{k}"

    def suffix(base, m):
        return base if config.model == "det" else f"{base}_{m}"

    rate_early, rate_late = params.wait_rates()
    if params.penalty_mode == "both":
        wait_vars = [("we", rate_early), ("wl", rate_late)]
    elif params.penalty_mode == "tardiness":
        wait_vars = [("w", rate_late)]
    else:
        wait_vars = [("w", rate_early)]

    w = _LpWriter()
    w.section(f"\\ routing and appointment scheduling model ({config.model})")
    w.section(f"\\ n={n} caregivers={k_count} scenarios={m_count} big_m={_fmt(big_m)}")
    w.section("Minimize")
    obj: dict[str, float] = {}

    def objective_term(coef: float, var: str):
        obj[var] = obj.get(var, 0.0) + coef

    for k in ks:
        for j in clients:
            objective_term(params.c_fixed, x(0, j, k))
    for k in ks:
        for i in v1:
            for j in v2:
                if i == j:
                    continue
                cost = params.travel_cost_factor * float(instance.distances[i, j])
                if cost:
                    objective_term(cost, x(i, j, k))
    for m in ms:
        for name, rate in wait_vars:
            for j in clients:
                objective_term(rate / m_count, suffix(f"{name}_{j}", m))
        for k in ks:
            objective_term(params.c_overtime / m_count, suffix(f"o_{k}", m))
    w.row("obj", [(coef, var) for var, coef in obj.items()])

    w.section("Subject To")
    for i in clients:
        terms = [(1.0, x(i, j, k)) for k in ks for j in v2 if j != i]
        w.row(f"serve_{i}", terms, "=", 1.0)
    for k in ks:
        w.row(f"depart_{k}", [(1.0, x(0, j, k)) for j in v2], "=", 1.0)
        w.row(f"return_{k}", [(1.0, x(i, dest, k)) for i in v1], "=", 1.0)
    for i in clients:
        for k in ks:
            terms = [(1.0, x(i, j, k)) for j in v2 if j != i]
            terms += [(-1.0, x(j, i, k)) for j in v1 if j != i]
            w.row(f"flow_{i}_{k}", terms, "=", 0.0)

    for m, scen in zip(ms, tables.scenarios):
        tt = scen.travel_time
        ts = scen.service_time
        for k in ks:
            for i in v1:
                for j in clients:
                    if i == j:
                        continue
                    hop = float(ts[i]) + float(tt[i, j])
                    tag = f"{i}_{j}_{k}" + ("" if config.model == "det" else f"_{m}")
                    sched = [(-1.0, f"s_{j}"), (big_m, x(i, j, k))]
                    if i != 0:
                        sched.insert(0, (1.0, f"s_{i}"))
                    w.row(f"spac_{tag}", sched, "<=", big_m - hop)
                    lo = [(-1.0, suffix(f"a_{j}", m)), (big_m, x(i, j, k))]
                    hi = [(1.0, suffix(f"a_{j}", m)), (big_m, x(i, j, k))]
                    if i != 0:
                        lo.insert(0, (1.0, suffix(f"b_{i}", m)))
                        hi.insert(1, (-1.0, suffix(f"b_{i}", m)))
                    w.row(f"arr_lo_{tag}", lo, "<=", big_m - hop)
                    w.row(f"arr_hi_{tag}", hi, "<=", big_m + hop)
            for i in v1:
                hop = float(ts[i]) + float(tt[i, dest])
                tag = f"{i}_{k}" + ("" if config.model == "det" else f"_{m}")
                terms = [(-1.0, suffix(f"o_{k}", m)), (big_m, x(i, dest, k))]
                if i != 0:
                    terms.insert(0, (1.0, f"s_{i}"))
                w.row(
                    f"over_{tag}",
                    terms,
                    "<=",
                    big_m + params.shift_length - hop,
                )
        for j in clients:
            tag = f"{j}" + ("" if config.model == "det" else f"_{m}")
            w.row(
                f"beg_a_{tag}",
                [(1.0, suffix(f"b_{j}", m)), (-1.0, suffix(f"a_{j}", m))],
                ">=",
                0.0,
            )
            w.row(
                f"beg_s_{tag}",
                [(1.0, suffix(f"b_{j}", m)), (-1.0, f"s_{j}")],
                ">=",
                0.0,
            )
            for name, _ in wait_vars:
                var = suffix(f"{name}_{j}", m)
                if name == "wl" or params.penalty_mode == "tardiness":
                    terms = [(1.0, var), (-1.0, suffix(f"a_{j}", m)), (1.0, f"s_{j}")]
                else:
                    terms = [(1.0, var), (1.0, suffix(f"a_{j}", m)), (-1.0, f"s_{j}")]
                w.row(f"wait_{name}_{tag}", terms, ">=", 0.0)

    w.section("Bounds")
    meaningful = {(i, j) for i in v1 for j in v2 if i != j}
    for k in ks:
        for i in all_nodes:
            for j in all_nodes:
                if (i, j) not in meaningful:
                    w.lines.append(f" {x(i, j, k)} = 0")

    w.section("Binaries")
    names = [x(i, j, k) for k in ks for i in all_nodes for j in all_nodes]
    for chunk in range(0, len(names), 8):
        w.lines.append(" " + " ".join(names[chunk : chunk + 8]))
    w.section("End")
    return w.text()


def export_lp(
    instance: Instance, scenarios: ScenarioSet, config: LpExportConfig
) -> Path:
    """Write the LP text to ``config.path`` and return the path."""
    if config.path is None:
        raise DomainError("LpExportConfig.path is required for export")
    text = build_lp(instance, scenarios, config)
    path = Path(config.path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write LP file {path}: {exc}") from exc
    return path


@dataclass
class LpModel:
    """Parsed form of an exported LP file."""

    objective: dict[str, float]
    constraints: list[tuple[str, dict[str, float], str, float]]
    fixed: dict[str, float]
    binaries: set[str]

    @property
    def variables(self) -> set[str]:
        out = set(self.objective)
        for _, coeffs, _, _ in self.constraints:
            out.update(coeffs)
        out.update(self.fixed)
        out.update(self.binaries)
        return out


def _parse_terms(tokens: list[str]) -> dict[str, float]:
    coeffs: dict[str, float] = {}
    sign = 1.0
    pending: float | None = None
    for tok in tokens:
        if tok == "+":
            sign, pending = 1.0, None
        elif tok == "-":
            sign, pending = -1.0, None
        else:
            try:
                value = float(tok)
            except ValueError:
                coef = sign * (1.0 if pending is None else pending)
                coeffs[tok] = coeffs.get(tok, 0.0) + coef
                sign, pending = 1.0, None
            else:
                if pending is not None:
                    raise DomainError(f"two consecutive numbers near {tok!r}")
                pending = value
    if pending is not None:
        raise DomainError("dangling coefficient in expression")
    return coeffs


def parse_lp(text: str) -> LpModel:
    """Parse the grammar subset documented in the module docstring."""
    section = None
    objective: dict[str, float] = {}
    constraints: list[tuple[str, dict[str, float], str, float]] = []
    fixed: dict[str, float] = {}
    binaries: set[str] = set()
    logical: list[str] = []
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].rstrip()
        if not line.strip():
            continue
        head = line.strip().lower()
        if head in ("minimize", "subject to", "bounds", "binaries", "end"):
            section = head
            continue
        if line.startswith("  ") and logical:
            logical[-1] += line
        else:
            logical.append(f"{section}\x00{line.strip()}")
    for entry in logical:
        section, line = entry.split("\x00", 1)
        if section == "minimize":
            _, expr = line.split(":", 1)
            objective.update(_parse_terms(expr.split()))
        elif section == "subject to":
            name, expr = line.split(":", 1)
            tokens = expr.split()
            sense_pos = next(i for i, t in enumerate(tokens) if t in ("<=", ">=", "="))
            coeffs = _parse_terms(tokens[:sense_pos])
            constraints.append(
                (name.strip(), coeffs, tokens[sense_pos], float(tokens[sense_pos + 1]))
            )
        elif section == "bounds":
            var, _, value = line.split()
            fixed[var] = float(value)
        elif section == "binaries":
            binaries.update(line.split())
        elif section == "end":
            raise DomainError("content after End section")
        else:
            raise DomainError(f"line outside any section: {line!r}")
    return LpModel(objective, constraints, fixed, binaries)
