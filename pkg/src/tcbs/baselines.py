"""Sub-optimal comparison solvers: allocate first, then run CBS on fixed
assignment lists."""
from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .grid import UnreachableError, true_distance
from .model import Problem
from .search import (BudgetExceeded, Result, SearchNode, SearchStats, SolverConfig,
                     _to_solution, check_reachable, evaluate, expand)
from .spacetime import InfeasibleError, PathPlanner


@dataclass
class AssignmentPlan:
    agent_task: Dict[int, int] = field(default_factory=dict)   # agent -> first task
    consecutive: Dict[int, int] = field(default_factory=dict)  # task -> next task

    def task_lists(self, n_agents: int) -> Tuple[Tuple[int, ...], ...]:
        out = []
        for j in range(n_agents):
            lst = []
            i = self.agent_task.get(j)
            while i is not None:
                if i in lst:
                    raise ValueError("cyclic task chain")
                lst.append(i)
                i = self.consecutive.get(i)
            out.append(tuple(lst))
        return tuple(out)

    @classmethod
    def from_task_lists(cls, lists) -> "AssignmentPlan":
        plan = cls()
        for j, lst in enumerate(lists):
            if lst:
                plan.agent_task[j] = lst[0]
                for a, b in zip(lst, lst[1:]):
                    plan.consecutive[a] = b
        return plan


def _dist(gmap, a, b) -> float:
    try:
        return true_distance(gmap, a, b)
    except UnreachableError:
        return math.inf


def greedy_assign(problem: Problem) -> AssignmentPlan:
    """Repeatedly match the globally closest (pose, free task) pair.

    Poses are the free agents, plus the goals of already placed tasks that
    have no successor yet whenever free tasks outnumber free agents.
    Ties go to agents before task ends, then lower index, then lower task.
    """
    gmap = problem.gmap
    tasks = problem.tasks
    free_agents = list(range(problem.n_agents))
    free_tasks = list(range(problem.m_tasks))
    placed: List[int] = []
    plan = AssignmentPlan()
    while free_tasks:
        poses = [(0, j, problem.agent_starts[j]) for j in free_agents]
        if len(free_tasks) > len(free_agents):
            poses += [(1, i, tasks[i].goal) for i in placed if i not in plan.consecutive]
        best = None
        for kind, idx, cell in poses:
            for i in free_tasks:
                key = (_dist(gmap, cell, tasks[i].start), kind, idx, i)
                if best is None or key < best:
                    best = key
        d, kind, idx, i = best
        if math.isinf(d):
            raise InfeasibleError(f"no pose reaches any of tasks {free_tasks}")
        free_tasks.remove(i)
        placed.append(i)
        if kind == 1:
            plan.consecutive[idx] = i
        else:
            plan.agent_task[idx] = i
            free_agents.remove(idx)
    return plan


def relaxed_cost(problem: Problem, lists) -> float:
    """Sum of completion times if agents never interfere."""
    gmap = problem.gmap
    total = 0
    for j, lst in enumerate(lists):
        pos, t = problem.agent_starts[j], 0
        for i in lst:
            task = problem.tasks[i]
            t += _dist(gmap, pos, task.start) + _dist(gmap, task.start, task.goal)
            total += t
            pos = task.goal
    return total


def decoupled_assign(problem: Problem, budget: int = 1_000_000) -> AssignmentPlan:
    """Exact optimum of the collision-blind allocation problem by enumeration."""
    n, m = problem.n_agents, problem.m_tasks
    if n ** m * math.factorial(m) > budget:
        raise BudgetExceeded(f"{n}^{m}*{m}! sequences exceed budget {budget}")
    best, best_lists = math.inf, None
    order_cache: Dict[Tuple[int, Tuple[int, ...]], Tuple[float, Tuple[int, ...]]] = {}

    def best_order(j, group):
        key = (j, group)
        if key not in order_cache:
            cands = ((relaxed_cost_single(problem, j, perm), perm)
                     for perm in itertools.permutations(group))
            order_cache[key] = min(cands, key=lambda c: c[0])
        return order_cache[key]

    for owners in itertools.product(range(n), repeat=m):
        groups = [tuple(i for i in range(m) if owners[i] == j) for j in range(n)]
        cost, lists = 0, []
        for j, g in enumerate(groups):
            c, perm = best_order(j, g) if g else (0, ())
            cost += c
            lists.append(perm)
        if cost < best:
            best, best_lists = cost, lists
    if best_lists is None or math.isinf(best):
        raise InfeasibleError("no allocation reaches every task")
    return AssignmentPlan.from_task_lists(best_lists)


def relaxed_cost_single(problem: Problem, agent: int, order) -> float:
    lists = [()] * problem.n_agents
    lists[agent] = tuple(order)
    return relaxed_cost(problem, lists)


def cbs_solve(problem: Problem, plan: AssignmentPlan, config: SolverConfig = SolverConfig(),
              planner: Optional[PathPlanner] = None) -> Result:
    """Conflict-based search with the assignment lists held fixed."""
    t0 = time.perf_counter()
    lists = plan.task_lists(problem.n_agents)
    covered = sorted(i for lst in lists for i in lst)
    if covered != list(range(problem.m_tasks)):
        raise ValueError("plan must cover every task exactly once")
    planner = planner or PathPlanner(problem.gmap)
    ll0 = planner.expansions
    stats = SearchStats()
    root = SearchNode(lists, tuple(frozenset() for _ in lists))
    evaluate(root, problem, planner)
    if not root.feasible:
        raise InfeasibleError("assignment cannot be planned")
    tie = itertools.count()
    seen = {root.key()}
    open_list = [(root.g_cost, 0, next(tie), root)]
    while open_list:
        node = heapq.heappop(open_list)[-1]
        if node.first_conflict is None:
            stats.low_level_expansions = planner.expansions - ll0
            stats.wall_time = time.perf_counter() - t0
            return Result(_to_solution(node, problem), stats)
        if stats.nodes_expanded >= config.node_budget:
            raise BudgetExceeded(f"node budget {config.node_budget} exhausted")
        if config.time_limit is not None and time.perf_counter() - t0 > config.time_limit:
            raise BudgetExceeded(f"time limit {config.time_limit}s exceeded")
        stats.nodes_expanded += 1
        for child in expand(node, problem):
            if child.key() in seen:
                continue
            seen.add(child.key())
            evaluate(child, problem, planner)
            if child.feasible:
                stats.nodes_generated += 1
                heapq.heappush(open_list, (child.g_cost, child.n_constraints, next(tie), child))
    raise InfeasibleError("conflicts cannot be resolved for this assignment")


def _timed(assign, problem, config):
    t0 = time.perf_counter()
    try:
        check_reachable(problem)
    except UnreachableError as e:
        raise InfeasibleError(str(e)) from e
    plan = assign(problem)
    res = cbs_solve(problem, plan, config)
    res.stats.wall_time = time.perf_counter() - t0
    return res


def solve_greedy(problem: Problem, config: SolverConfig = SolverConfig()) -> Result:
    return _timed(greedy_assign, problem, config)


def solve_decoupled(problem: Problem, config: SolverConfig = SolverConfig()) -> Result:
    return _timed(decoupled_assign, problem, config)
