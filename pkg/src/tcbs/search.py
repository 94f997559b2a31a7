"""Task Conflict-Based Search: best-first search over task assignments and
avoidance constraints."""
from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Tuple

from .grid import UnreachableError, true_distance
from .model import Conflict, Problem, Solution, count_conflicts, first_conflict
from .spacetime import EDGE, Constraint, InfeasibleError, Path, PathPlanner, pad_paths

OPTIMAL = "optimal"
NN2 = "nn2"


class BudgetExceeded(Exception):
    pass


@dataclass(frozen=True)
class SolverConfig:
    mode: str = OPTIMAL
    nn_k: int = 2
    h_weight: Optional[float] = None  # None: 1.0 for optimal, 1.2 for nn2
    node_budget: int = 2_000_000
    time_limit: Optional[float] = None  # seconds
    dedup: bool = True

    def __post_init__(self):
        if self.mode not in (OPTIMAL, NN2):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.nn_k < 1:
            raise ValueError("nn_k must be >= 1")
        if self.weight < 1:
            raise ValueError("h_weight must be >= 1")

    @property
    def weight(self) -> float:
        if self.h_weight is not None:
            return self.h_weight
        return 1.0 if self.mode == OPTIMAL else 1.2


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    nodes_generated: int = 0
    low_level_expansions: int = 0
    wall_time: float = 0.0


Tau = Tuple[Tuple[int, ...], ...]
Beta = Tuple[FrozenSet[Constraint], ...]


@dataclass(eq=False)
class SearchNode:
    tau: Tau
    beta: Beta
    parent: Optional["SearchNode"] = None
    created_by: Optional[Tuple[int, int]] = None  # (agent, task) for assignment children
    g_cost: float = 0
    h_cost: float = 0
    paths: Optional[Tuple[Path, ...]] = None  # padded to a common length
    raw_paths: Optional[Tuple[Path, ...]] = None
    changed: Optional[int] = None  # the one agent whose (tau, beta) differs from parent
    first_conflict: Optional[Conflict] = None
    n_conflicts: int = 0
    feasible: bool = True

    def key(self):
        return self.tau, self.beta

    def assigned(self) -> set:
        return {i for lst in self.tau for i in lst}

    @property
    def n_constraints(self) -> int:
        return sum(len(b) for b in self.beta)


def root_node(problem: Problem) -> SearchNode:
    tau = problem.initial_assignments or tuple(() for _ in problem.agent_starts)
    return SearchNode(tuple(tuple(t) for t in tau),
                      tuple(frozenset() for _ in problem.agent_starts))


def plan_agent(node: SearchNode, problem: Problem, planner: PathPlanner, j: int,
               others: List[Path]) -> Path:
    tau = node.tau[j]
    charged = range(1, 2 * len(tau), 2)
    return planner.plan(problem.agent_starts[j], problem.waypoints(tau), node.beta[j],
                        charged, avoid=others)


def evaluate(node: SearchNode, problem: Problem, planner: PathPlanner) -> SearchNode:
    """Plan paths for (tau, beta), then set cost and conflict.

    Only the agent that differs from the parent is replanned; its equal-cost
    alternatives are ranked by collisions with the inherited paths.
    """
    parent = node.parent
    try:
        if parent is not None and parent.raw_paths is not None and node.changed is not None:
            paths = list(parent.raw_paths)
            j = node.changed
            paths[j] = plan_agent(node, problem, planner, j, paths[:j] + paths[j + 1:])
        else:
            paths = []
            for j in range(problem.n_agents):
                paths.append(plan_agent(node, problem, planner, j, list(paths)))
    except (InfeasibleError, UnreachableError):
        node.feasible = False
        node.g_cost = float("inf")
        return node
    node.raw_paths = tuple(paths)
    padded = pad_paths(paths)
    node.paths = tuple(padded)
    node.first_conflict = first_conflict(padded)
    node.n_conflicts = count_conflicts(padded) if node.first_conflict else 0
    # sum of arrival times at every assigned task goal
    node.g_cost = sum(t for p in paths for (k, t) in p.waypoint_arrivals if k % 2 == 1)
    return node


def heuristic(node: SearchNode, problem: Problem) -> float:
    """Optimistic cost of the still unassigned tasks.

    Each task may be reached from any agent's current end position or from
    the goal of any other task; the same source may serve several tasks.
    """
    gmap = problem.gmap
    tasks = problem.tasks
    assigned = node.assigned()
    ends = []
    for j, start in enumerate(problem.agent_starts):
        lst = node.tau[j]
        ends.append(tasks[lst[-1]].goal if lst else start)
    cost = 0
    for i, task in enumerate(tasks):
        if i in assigned:
            continue
        sources = ends + [t.goal for k, t in enumerate(tasks) if k != i]
        cost += min(gmap.cached_distance(s, task.start) for s in sources)
        cost += gmap.cached_distance(task.start, task.goal)
    return cost


def goal_test(node: SearchNode, problem: Problem) -> bool:
    return node.first_conflict is None and len(node.assigned()) == problem.m_tasks


def expand(node: SearchNode, problem: Problem) -> List[SearchNode]:
    conflict = node.first_conflict
    children = []
    if conflict is not None:
        for j, con in conflict_constraints(conflict):
            beta = list(node.beta)
            beta[j] = beta[j] | {con}
            children.append(SearchNode(node.tau, tuple(beta), parent=node, changed=j))
        return children
    assigned = node.assigned()
    for i in range(problem.m_tasks):
        if i in assigned:
            continue
        for j in range(problem.n_agents):
            tau = list(node.tau)
            tau[j] = tau[j] + (i,)
            children.append(SearchNode(tuple(tau), node.beta, parent=node,
                                       created_by=(j, i), changed=j))
    return children


def conflict_constraints(conflict: Conflict) -> List[Tuple[int, Constraint]]:
    a, b = conflict.agents
    t = conflict.time
    if conflict.kind == EDGE:
        return [(a, Constraint.edge(conflict.cell_a, conflict.cell_b, t)),
                (b, Constraint.edge(conflict.cell_b, conflict.cell_a, t))]
    return [(a, Constraint.vertex(conflict.cell_a, t)),
            (b, Constraint.vertex(conflict.cell_a, t))]


def prune_assignments(children: List[SearchNode], k: int) -> List[SearchNode]:
    """Keep the ``k`` children with the lowest g + h; ties by (agent, task)."""
    ranked = sorted(children, key=lambda c: (c.g_cost + c.h_cost,) + (c.created_by or (0, 0)))
    return ranked[:k]


@dataclass
class Result:
    solution: Solution
    stats: SearchStats = field(default_factory=SearchStats)


def check_reachable(problem: Problem):
    gmap = problem.gmap
    for i, task in enumerate(problem.tasks):
        true_distance(gmap, task.start, task.goal)
        if not any(task.start in gmap.distance_field(s) for s in problem.agent_starts):
            raise UnreachableError(f"task {i} start unreachable from every agent")


def solve(problem: Problem, config: SolverConfig = SolverConfig(),
          planner: Optional[PathPlanner] = None) -> Result:
    t0 = time.perf_counter()
    try:
        check_reachable(problem)
    except UnreachableError as e:
        raise InfeasibleError(str(e)) from e
    planner = planner or PathPlanner(problem.gmap)
    ll0 = planner.expansions
    stats = SearchStats()
    w = config.weight
    tie = itertools.count()
    seen = set()
    open_list = []

    def push(node):
        if config.dedup:
            k = node.key()
            if k in seen:
                return
            seen.add(k)
        stats.nodes_generated += 1
        heapq.heappush(open_list, (node.g_cost + w * node.h_cost, node.h_cost,
                                   node.n_conflicts, node.n_constraints, next(tie), node))

    root = evaluate(root_node(problem), problem, planner)
    if not root.feasible:
        raise InfeasibleError("initial assignment cannot be planned")
    root.h_cost = heuristic(root, problem)
    push(root)
    while open_list:
        node = heapq.heappop(open_list)[-1]
        if goal_test(node, problem):
            stats.low_level_expansions = planner.expansions - ll0
            stats.wall_time = time.perf_counter() - t0
            return Result(_to_solution(node, problem), stats)
        if stats.nodes_expanded >= config.node_budget:
            raise BudgetExceeded(f"node budget {config.node_budget} exhausted")
        if config.time_limit is not None and time.perf_counter() - t0 > config.time_limit:
            raise BudgetExceeded(f"time limit {config.time_limit}s exceeded")
        stats.nodes_expanded += 1
        children = []
        for child in expand(node, problem):
            if config.dedup and child.key() in seen:
                continue
            evaluate(child, problem, planner)
            if not child.feasible:
                continue
            child.h_cost = heuristic(child, problem)
            children.append(child)
        if config.mode == NN2 and node.first_conflict is None:
            children = prune_assignments(children, config.nn_k)
        for child in children:
            push(child)
    raise InfeasibleError("search space exhausted without a solution")


def _to_solution(node: SearchNode, problem: Problem) -> Solution:
    done = [0] * problem.m_tasks
    for j, path in enumerate(node.paths):
        for k, t in path.waypoint_arrivals:
            if k % 2 == 1:
                done[node.tau[j][k // 2]] = t
    return Solution(node.paths, tuple(done), sum(done), node.tau)
