"""Exhaustive uniform-cost search over the joint state space.

Ground truth for small instances. Deliberately shares no search code with
the tree search: it walks joint agent positions plus per-task status, one
synchronous time step at a time, and pays one unit per unfinished task per
step, which sums to the total of task completion times.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .grid import neighbors
from .model import AmbiguityError, Problem, Solution
from .search import BudgetExceeded
from .spacetime import InfeasibleError, Path

PENDING = -1
DONE = -2


@dataclass
class OracleResult:
    solution: Solution
    states_expanded: int


def _bindings(problem: Problem, positions, status, strict: bool) -> List[Tuple[int, ...]]:
    """Status tuples reachable by (optionally) activating tasks at the new positions."""
    tasks = problem.tasks
    options = [tuple(status)]
    for j, c in enumerate(positions):
        nxt = []
        for st in options:
            if j in st:
                nxt.append(st)
                continue
            cand = [i for i, t in enumerate(tasks) if st[i] == PENDING and t.start == c]
            if strict:
                if cand:
                    lst = list(st)
                    lst[cand[0]] = j
                    nxt.append(tuple(lst))
                else:
                    nxt.append(st)
            else:
                nxt.append(st)
                for i in cand:
                    lst = list(st)
                    lst[i] = j
                    nxt.append(tuple(lst))
        options = nxt
    return options


def brute_force_solve(problem: Problem, budget: int = 2_000_000, strict: bool = True) -> OracleResult:
    """Minimum sum-of-completion-times solution.

    ``strict`` applies the activation rule literally: an idle agent standing
    on a pending task's start is bound to it. With ``strict=False`` the agent
    may decline, which matches planners that treat assignment lists as
    authoritative.
    """
    if problem.initial_assignments and any(problem.initial_assignments):
        raise ValueError("oracle does not support pre-seeded assignments")
    tasks = problem.tasks
    if strict and len({t.start for t in tasks}) != len(tasks):
        raise AmbiguityError("tasks share a start cell")
    gmap = problem.gmap
    n = problem.n_agents
    moves = {c: [c] + neighbors(gmap, c) for c in gmap.free_cells()}

    def settle(positions, status):
        # deliveries first, then activations at the same step
        st = list(status)
        for i, owner in enumerate(st):
            if owner >= 0 and positions[owner] == tasks[i].goal:
                st[i] = DONE
        return _bindings(problem, positions, st, strict)

    start_pos = tuple(problem.agent_starts)
    tie = itertools.count()
    heap = []
    best: Dict[tuple, int] = {}
    parent: Dict[tuple, Optional[tuple]] = {}
    for st in settle(start_pos, (PENDING,) * len(tasks)):
        s = (start_pos, st)
        best[s] = 0
        parent[s] = None
        heapq.heappush(heap, (0, next(tie), s))
    closed = set()
    expanded = 0
    while heap:
        cost, _, s = heapq.heappop(heap)
        if s in closed:
            continue
        closed.add(s)
        pos, status = s
        if all(x == DONE for x in status):
            return OracleResult(_reconstruct(problem, s, parent, cost), expanded)
        expanded += 1
        if expanded > budget:
            raise BudgetExceeded(f"oracle state budget {budget} exhausted")
        step = sum(1 for x in status if x != DONE)
        for new in itertools.product(*(moves[c] for c in pos)):
            if len(set(new)) < n:
                continue
            if any(new[a] == pos[b] and new[b] == pos[a] and pos[a] != pos[b]
                   for a in range(n) for b in range(a + 1, n)):
                continue
            for st in settle(new, status):
                ns = (new, st)
                if ns in closed:
                    continue
                nc = cost + step
                if nc < best.get(ns, 1 << 60):
                    best[ns] = nc
                    parent[ns] = s
                    heapq.heappush(heap, (nc, next(tie), ns))
    raise InfeasibleError("no joint state fulfils every task")


def _reconstruct(problem: Problem, s, parent, cost) -> Solution:
    chain = []
    while s is not None:
        chain.append(s)
        s = parent[s]
    chain.reverse()
    m = problem.m_tasks
    done = [None] * m
    for t, (_, status) in enumerate(chain):
        for i in range(m):
            if status[i] == DONE and done[i] is None:
                done[i] = t
    assert sum(done) == cost, "per-step charging disagrees with completion times"
    paths = tuple(Path(tuple(st[0][j] for st in chain)) for j in range(problem.n_agents))
    return Solution(paths, tuple(done), cost)
