"""Problem data, collision semantics, implicit assignment and validation."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from .grid import Cell, GridMap, neighbors
from .spacetime import EDGE, VERTEX, Path, pad_paths


class ContractError(ValueError):
    pass


class AmbiguityError(ValueError):
    pass


@dataclass(frozen=True)
class Task:
    start: Cell
    goal: Cell

    def __post_init__(self):
        object.__setattr__(self, "start", Cell(*self.start))
        object.__setattr__(self, "goal", Cell(*self.goal))
        if self.start == self.goal:
            raise ValueError("task start equals goal")


@dataclass(frozen=True)
class Problem:
    gmap: GridMap
    agent_starts: Tuple[Cell, ...]
    tasks: Tuple[Task, ...]
    initial_assignments: Optional[Tuple[Tuple[int, ...], ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "agent_starts", tuple(Cell(*c) for c in self.agent_starts))
        object.__setattr__(self, "tasks", tuple(
            t if isinstance(t, Task) else Task(*t) for t in self.tasks))
        if not self.agent_starts or not self.tasks:
            raise ValueError("need at least one agent and one task")
        if len(set(self.agent_starts)) != len(self.agent_starts):
            raise ValueError("agent starts must be distinct")
        for c in self.agent_starts:
            if not self.gmap.is_free(c):
                raise ValueError(f"agent start {tuple(c)} is not free")
        for t in self.tasks:
            if not (self.gmap.is_free(t.start) and self.gmap.is_free(t.goal)):
                raise ValueError(f"task {t} touches a blocked cell")
        if self.initial_assignments is not None:
            ia = tuple(tuple(int(i) for i in lst) for lst in self.initial_assignments)
            if len(ia) != self.n_agents:
                raise ValueError("initial_assignments needs one list per agent")
            flat = [i for lst in ia for i in lst]
            if len(set(flat)) != len(flat) or any(not 0 <= i < self.m_tasks for i in flat):
                raise ValueError("initial_assignments must reference distinct valid tasks")
            object.__setattr__(self, "initial_assignments", ia)

    @property
    def n_agents(self) -> int:
        return len(self.agent_starts)

    @property
    def m_tasks(self) -> int:
        return len(self.tasks)

    def waypoints(self, tau: Sequence[int]) -> List[Cell]:
        out = []
        for i in tau:
            out.extend((self.tasks[i].start, self.tasks[i].goal))
        return out


class Conflict(NamedTuple):
    time: int
    agents: Tuple[int, int]
    kind: str
    cell_a: Cell
    cell_b: Optional[Cell] = None


@dataclass(frozen=True)
class Solution:
    paths: Tuple[Path, ...]
    task_completion: Tuple[int, ...]
    total_cost: int
    assignments: Optional[Tuple[Tuple[int, ...], ...]] = None

    @property
    def horizon(self) -> int:
        return max(p.final_time for p in self.paths)


def detect_conflicts(paths: Sequence[Path]) -> List[Conflict]:
    if len({len(p) for p in paths}) > 1:
        raise ContractError("paths must be padded to equal length")
    out = []
    if not paths:
        return out
    T = len(paths[0])
    n = len(paths)
    for t in range(T):
        for a in range(n):
            ca = paths[a].cells[t]
            for b in range(a + 1, n):
                cb = paths[b].cells[t]
                if ca == cb:
                    out.append(Conflict(t, (a, b), VERTEX, ca))
                if t + 1 < T and ca != cb:
                    na, nb = paths[a].cells[t + 1], paths[b].cells[t + 1]
                    if na == cb and nb == ca:
                        out.append(Conflict(t, (a, b), EDGE, ca, na))
    return out


def first_conflict(paths: Sequence[Path]) -> Optional[Conflict]:
    """Earliest conflict, lowest agent pair first; same result as
    ``detect_conflicts(paths)[0]`` without scanning past it."""
    T = len(paths[0])
    n = len(paths)
    for t in range(T):
        for a in range(n):
            ca = paths[a].cells[t]
            for b in range(a + 1, n):
                cb = paths[b].cells[t]
                if ca == cb:
                    return Conflict(t, (a, b), VERTEX, ca)
                if t + 1 < T:
                    na, nb = paths[a].cells[t + 1], paths[b].cells[t + 1]
                    if na == cb and nb == ca:
                        return Conflict(t, (a, b), EDGE, ca, na)
    return None


def count_conflicts(paths: Sequence[Path]) -> int:
    """Number of colliding agent pairs (each pair counted once)."""
    T = len(paths[0])
    n = len(paths)
    count = 0
    for a in range(n):
        pa = paths[a].cells
        for b in range(a + 1, n):
            pb = paths[b].cells
            for t in range(T):
                if pa[t] == pb[t] or (t + 1 < T and pa[t + 1] == pb[t] and pb[t + 1] == pa[t]):
                    count += 1
                    break
    return count


class TaskEvent(NamedTuple):
    task: int
    started: int
    finished: Optional[int]


def implicit_events(path: Path, tasks: Sequence[Task]) -> List[TaskEvent]:
    """Replay the automatic-activation rule along one path.

    A task finishing at a cell that is another task's start lets the
    agent pick the next one up in the same time step.
    """
    starts: Dict[Cell, List[int]] = {}
    for i, t in enumerate(tasks):
        starts.setdefault(t.start, []).append(i)
    consumed = set()
    events = []
    running = None
    began = 0
    for time, c in enumerate(path.cells):
        if running is not None and c == tasks[running].goal:
            events.append(TaskEvent(running, began, time))
            running = None
        if running is None:
            cand = [i for i in starts.get(c, ()) if i not in consumed]
            if len(cand) > 1:
                raise AmbiguityError(f"tasks {cand} share start {tuple(c)}")
            if cand:
                running, began = cand[0], time
                consumed.add(running)
    if running is not None:
        events.append(TaskEvent(running, began, None))
    return events


def implicit_assignment(path: Path, tasks: Sequence[Task]) -> List[int]:
    return [e.task for e in implicit_events(path, tasks)]


def completion_times(paths: Sequence[Path], tasks: Sequence[Task],
                     assignments: Sequence[Sequence[int]]) -> List[int]:
    """Goal-arrival time of every task when agent j carries ``assignments[j]``
    in order."""
    out: List[Optional[int]] = [None] * len(tasks)
    for j, tau in enumerate(assignments):
        cells = paths[j].cells
        t = 0
        for i in tau:
            task = tasks[i]
            try:
                t = cells.index(task.start, t)
                t = cells.index(task.goal, t)
            except ValueError:
                raise ContractError(f"task {i} not realized by agent {j}'s path") from None
            out[i] = t
    return out


def solution_cost(paths: Sequence[Path], tasks: Sequence[Task],
                  assignments: Sequence[Sequence[int]]) -> int:
    return sum(t for t in completion_times(paths, tasks, assignments) if t is not None)


# validation --------------------------------------------------------------

ADJACENCY = "adjacency"
START = "start"
COLLISION = "conflict"
UNFULFILLED = "unfulfilled"
DUPLICATE = "duplicate"
COST = "cost"


class Violation(NamedTuple):
    kind: str
    message: str


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def kinds(self) -> set:
        return {v.kind for v in self.violations}

    def add(self, kind, message):
        self.violations.append(Violation(kind, message))

    def __str__(self):
        if self.valid:
            return "valid"
        return "\n".join(f"{v.kind}: {v.message}" for v in self.violations)


def validate_solution(problem: Problem, solution: Solution, strict: bool = False) -> ValidationReport:
    """Check a solution against the problem without trusting the solver.

    In relaxed mode the recorded completion times pick which agent carries
    each task (the one standing on its goal then); the path must visit the
    task start after the agent's previous delivery and then reach the goal
    for the first time at the recorded step. In strict mode the activation
    rule is replayed literally, so passing an unconsumed task start binds
    the agent.
    """
    rep = ValidationReport()
    gmap = problem.gmap
    paths = list(solution.paths)
    if len(paths) != problem.n_agents:
        rep.add(START, f"{len(paths)} paths for {problem.n_agents} agents")
        return rep
    if any(len(p) == 0 for p in paths):
        rep.add(ADJACENCY, "empty path")
        return rep
    for j, p in enumerate(paths):
        if p.cells[0] != problem.agent_starts[j]:
            rep.add(START, f"agent {j} starts at {tuple(p.cells[0])}, "
                           f"expected {tuple(problem.agent_starts[j])}")
        for t in range(len(p) - 1):
            a, b = p.cells[t], p.cells[t + 1]
            if not gmap.is_free(a) or not gmap.is_free(b):
                rep.add(ADJACENCY, f"agent {j} on blocked cell at t={t}")
                break
            if a != b and b not in neighbors(gmap, a):
                rep.add(ADJACENCY, f"agent {j} jumps {tuple(a)}->{tuple(b)} at t={t}")
        if len(p) == 1 and not gmap.is_free(p.cells[0]):
            rep.add(ADJACENCY, f"agent {j} on blocked cell")
    padded = pad_paths(paths)
    for c in detect_conflicts(padded):
        what = f"{tuple(c.cell_a)}" if c.kind == VERTEX else f"{tuple(c.cell_a)}<->{tuple(c.cell_b)}"
        rep.add(COLLISION, f"{c.kind} conflict agents {c.agents} t={c.time} at {what}")

    m = problem.m_tasks
    recorded = list(solution.task_completion)
    if len(recorded) != m:
        rep.add(COST, f"{len(recorded)} completion times for {m} tasks")
        return rep
    if strict:
        found = _strict_completions(problem, padded, rep)
    else:
        found = _relaxed_completions(problem, padded, recorded, rep)
    for i in range(m):
        if found[i] is not None and found[i] != recorded[i]:
            rep.add(COST, f"task {i} recorded done at {recorded[i]}, paths give {found[i]}")
    if sum(recorded) != solution.total_cost:
        rep.add(COST, f"total_cost {solution.total_cost} != sum of completions {sum(recorded)}")
    return rep


def implicit_replay(paths: Sequence[Path], tasks: Sequence[Task]) -> List[List[TaskEvent]]:
    """Joint version of :func:`implicit_events`: a task consumed by one agent
    no longer binds others that pass its start later."""
    starts: Dict[Cell, List[int]] = {}
    for i, t in enumerate(tasks):
        starts.setdefault(t.start, []).append(i)
    consumed: Dict[int, int] = {}
    running: List[Optional[Tuple[int, int]]] = [None] * len(paths)
    events: List[List[TaskEvent]] = [[] for _ in paths]
    T = max(len(p) for p in paths)
    for time in range(T):
        for j, p in enumerate(paths):
            c = p.at(time)
            if running[j] is not None and c == tasks[running[j][0]].goal:
                events[j].append(TaskEvent(running[j][0], running[j][1], time))
                running[j] = None
        for j, p in enumerate(paths):
            if running[j] is not None:
                continue
            c = p.at(time)
            cand = [i for i in starts.get(c, ()) if i not in consumed]
            if len(cand) > 1:
                raise AmbiguityError(f"tasks {cand} share start {tuple(c)}")
            if cand:
                running[j] = (cand[0], time)
                consumed[cand[0]] = j
    for j, r in enumerate(running):
        if r is not None:
            events[j].append(TaskEvent(r[0], r[1], None))
    return events


def _strict_completions(problem, padded, rep) -> List[Optional[int]]:
    found: List[Optional[int]] = [None] * problem.m_tasks
    try:
        per_agent = implicit_replay(padded, problem.tasks)
    except AmbiguityError as e:
        rep.add(UNFULFILLED, str(e))
        return found
    owner: Dict[int, int] = {}
    for j, events in enumerate(per_agent):
        for e in events:
            owner[e.task] = j
            if e.finished is None:
                rep.add(UNFULFILLED, f"task {e.task} started by agent {j} but never delivered")
            else:
                found[e.task] = e.finished
    # two agents on one start cell in the same step both count as claiming it
    T = len(padded[0])
    for i, task in enumerate(problem.tasks):
        for t in range(T):
            here = [j for j, p in enumerate(padded) if p.cells[t] == task.start]
            if len(here) > 1 and owner.get(i) in here:
                rep.add(DUPLICATE, f"task {i} claimed by agents {here} at t={t}")
                break
    for i in range(problem.m_tasks):
        if i not in owner:
            rep.add(UNFULFILLED, f"task {i} never activated")
    return found


def _relaxed_completions(problem, padded, recorded, rep) -> List[Optional[int]]:
    tasks = problem.tasks
    T = len(padded[0])
    per_agent: Dict[int, List[int]] = {}
    for i, ti in enumerate(recorded):
        ti = int(ti)
        holders = [j for j, p in enumerate(padded) if ti < T and p.cells[ti] == tasks[i].goal]
        if not holders:
            rep.add(UNFULFILLED, f"no agent at goal of task {i} at t={ti}")
            continue
        per_agent.setdefault(holders[0], []).append(i)
    for j, lst in per_agent.items():
        cells = padded[j].cells
        prev = 0
        for i in sorted(lst, key=lambda i: recorded[i]):
            ti = recorded[i]
            pick = None
            for p in range(ti - 1, prev - 1, -1):
                if cells[p] == tasks[i].start:
                    pick = p
                    break
            if pick is None or tasks[i].goal in cells[pick + 1:ti]:
                rep.add(UNFULFILLED, f"task {i} not carried by agent {j} to t={ti}")
            prev = ti
    # relaxed mode trusts the recorded times once they are consistent
    return [None] * len(tasks)
