"""Regret and planning-time benchmark over seeded random scenarios."""
from __future__ import annotations

import csv
import logging
import statistics
import time
from dataclasses import asdict, dataclass, fields
from typing import Callable, Dict, Iterable, List, Optional, Sequence

from .baselines import solve_decoupled, solve_greedy
from .model import Problem, validate_solution
from .oracle import brute_force_solve
from .scenario import ScenarioSpec, gen_scenario
from .search import NN2, OPTIMAL, BudgetExceeded, SolverConfig, solve
from .spacetime import InfeasibleError

log = logging.getLogger(__name__)

SOLVERS = ("tcbs", "tcbs-nn2", "greedy", "decoupled")
DEFAULT_TIME_LIMIT = 60.0
DEFAULT_NODE_BUDGET = 2_000_000


@dataclass
class BenchRecord:
    scenario_id: str
    solver: str
    m_tasks: int
    total_cost: Optional[int] = None
    optimal_cost: Optional[int] = None
    regret_total: Optional[int] = None
    regret_per_task: Optional[float] = None
    planning_ms: Optional[float] = None
    nodes_expanded: Optional[int] = None
    status: str = "ok"


FIELDS = [f.name for f in fields(BenchRecord)]
COST_FIELDS = ["scenario_id", "solver", "m_tasks", "total_cost", "optimal_cost",
               "regret_total", "regret_per_task", "nodes_expanded", "status"]


def solver_fn(name: str, config: SolverConfig) -> Callable:
    if name == "tcbs":
        return lambda p: solve(p, SolverConfig(OPTIMAL, node_budget=config.node_budget,
                                               time_limit=config.time_limit))
    if name == "tcbs-nn2":
        return lambda p: solve(p, SolverConfig(NN2, node_budget=config.node_budget,
                                               time_limit=config.time_limit))
    if name == "greedy":
        return lambda p: solve_greedy(p, config)
    if name == "decoupled":
        return lambda p: solve_decoupled(p, config)
    raise ValueError(f"unknown solver {name!r}")


def oracle_sized(problem: Problem) -> bool:
    return (problem.n_agents <= 2 and problem.m_tasks <= 2
            and len(problem.gmap.free_cells()) <= 25)


def scenario_id(spec: ScenarioSpec) -> str:
    return (f"s{spec.seed}-{spec.width}x{spec.height}-d{spec.obstacle_density:g}"
            f"-n{spec.n_agents}-m{spec.m_tasks}")


def run_one(problem: Problem, name: str, config: SolverConfig):
    """Returns (record fields, solution or None)."""
    fn = solver_fn(name, config)
    t0 = time.perf_counter()
    try:
        res = fn(problem)
    except BudgetExceeded:
        return {"status": "timeout", "planning_ms": (time.perf_counter() - t0) * 1e3}, None
    except InfeasibleError:
        return {"status": "infeasible", "planning_ms": (time.perf_counter() - t0) * 1e3}, None
    ms = (time.perf_counter() - t0) * 1e3
    sol = res.solution
    rec = {"status": "ok", "total_cost": sol.total_cost, "planning_ms": ms,
           "nodes_expanded": res.stats.nodes_expanded}
    report = validate_solution(problem, sol)
    if not report.valid:
        log.error("%s produced an invalid solution: %s", name, report)
        rec["status"] = "invalid"
    elif not validate_solution(problem, sol, strict=True).valid:
        log.info("%s solution relies on passing unassigned task starts", name)
    return rec, sol


def run_benchmark(specs: Iterable[ScenarioSpec], solvers: Sequence[str] = SOLVERS,
                  output: Optional[str] = None, config: Optional[SolverConfig] = None,
                  use_oracle: bool = True, progress: Optional[Callable] = None) -> List[BenchRecord]:
    config = config or SolverConfig(node_budget=DEFAULT_NODE_BUDGET, time_limit=DEFAULT_TIME_LIMIT)
    for s in solvers:
        if s not in SOLVERS:
            raise ValueError(f"unknown solver {s!r}")
    records: List[BenchRecord] = []
    out = None
    writer = None
    if output is not None:
        out = open(output, "w", newline="")
        writer = csv.DictWriter(out, fieldnames=FIELDS)
        writer.writeheader()
    try:
        for spec in specs:
            problem = gen_scenario(spec)
            sid = scenario_id(spec)
            rows = {}
            for name in solvers:
                rec, _ = run_one(problem, name, config)
                rows[name] = BenchRecord(sid, name, spec.m_tasks, **rec)
            optimal = None
            if use_oracle and oracle_sized(problem):
                optimal = brute_force_solve(problem).solution.total_cost
                tc = rows.get("tcbs")
                if tc is not None and tc.status == "ok" and tc.total_cost != optimal:
                    log.warning("%s: tcbs cost %s differs from oracle %s", sid, tc.total_cost, optimal)
            elif "tcbs" in rows and rows["tcbs"].status == "ok":
                optimal = rows["tcbs"].total_cost
            else:
                res = None
                try:
                    res = solve(problem, SolverConfig(node_budget=config.node_budget,
                                                      time_limit=config.time_limit))
                except (BudgetExceeded, InfeasibleError):
                    pass
                optimal = res.solution.total_cost if res else None
            for rec in rows.values():
                if rec.status == "ok" and optimal is not None:
                    rec.optimal_cost = optimal
                    rec.regret_total = rec.total_cost - optimal
                    rec.regret_per_task = rec.regret_total / spec.m_tasks
                records.append(rec)
                if writer:
                    writer.writerow(_row(rec))
            if out:
                out.flush()
            if progress:
                progress(sid)
    finally:
        if out:
            out.close()
    return records


def _row(rec: BenchRecord) -> Dict[str, str]:
    d = asdict(rec)
    out = {}
    for k, v in d.items():
        if v is None:
            out[k] = ""
        elif k == "planning_ms":
            out[k] = f"{v:.3f}"
        elif k == "regret_per_task":
            out[k] = repr(float(v))
        else:
            out[k] = str(v)
    return out


def read_csv(path: str) -> List[BenchRecord]:
    ints = {"m_tasks", "total_cost", "optimal_cost", "regret_total", "nodes_expanded"}
    floats = {"regret_per_task", "planning_ms"}
    out = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != FIELDS:
            raise ValueError(f"unexpected columns {reader.fieldnames}")
        for row in reader:
            kw = {}
            for k, v in row.items():
                if v == "" and k not in ("scenario_id", "solver", "status"):
                    kw[k] = None
                elif k in ints:
                    kw[k] = int(v)
                elif k in floats:
                    kw[k] = float(v)
                else:
                    kw[k] = v
            out.append(BenchRecord(**kw))
    return out


@dataclass
class SummaryRow:
    solver: str
    m_tasks: int
    n_ok: int
    n_total: int
    mean_regret_per_task: Optional[float]
    median_regret_per_task: Optional[float]
    mean_planning_ms: Optional[float]
    median_planning_ms: Optional[float]


def summarize(records: Iterable[BenchRecord]) -> List[SummaryRow]:
    groups: Dict[tuple, List[BenchRecord]] = {}
    for r in records:
        groups.setdefault((r.solver, r.m_tasks), []).append(r)
    order = {s: i for i, s in enumerate(SOLVERS)}
    rows = []
    for (solver, m), recs in sorted(groups.items(), key=lambda kv: (order.get(kv[0][0], 99), kv[0][1])):
        ok = [r for r in recs if r.status == "ok"]
        reg = [r.regret_per_task for r in ok if r.regret_per_task is not None]
        ms = [r.planning_ms for r in ok]
        rows.append(SummaryRow(
            solver, m, len(ok), len(recs),
            statistics.fmean(reg) if reg else None, statistics.median(reg) if reg else None,
            statistics.fmean(ms) if ms else None, statistics.median(ms) if ms else None))
    return rows


def format_summary(rows: Sequence[SummaryRow]) -> str:
    def f(v, spec):
        return "-" if v is None else format(v, spec)
    lines = [f"{'solver':<10} {'m':>2} {'ok':>7} {'regret/task':>12} {'median':>8} "
             f"{'time ms':>10} {'median':>10}"]
    for r in rows:
        lines.append(f"{r.solver:<10} {r.m_tasks:>2} {f'{r.n_ok}/{r.n_total}':>7} "
                     f"{f(r.mean_regret_per_task, '.3f'):>12} {f(r.median_regret_per_task, '.3f'):>8} "
                     f"{f(r.mean_planning_ms, '.1f'):>10} {f(r.median_planning_ms, '.1f'):>10}")
    return "\n".join(lines)


def benchmark_specs(n_scenarios: int, task_counts: Sequence[int], seed_start: int = 0,
                    width: int = 8, height: int = 8, density: float = 0.2,
                    n_agents: int = 3) -> List[ScenarioSpec]:
    return [ScenarioSpec(seed_start + k, width, height, density, n_agents, m)
            for m in task_counts for k in range(n_scenarios)]
