import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_problem
from tcbs.grid import Cell, parse_map
from tcbs.model import (ADJACENCY, COLLISION, COST, START, UNFULFILLED, AmbiguityError,
                        ContractError, Problem, Solution, Task, count_conflicts,
                        detect_conflicts, first_conflict, implicit_assignment, implicit_replay,
                        solution_cost, validate_solution)
from tcbs.spacetime import Path


def P(*cells):
    return Path(tuple(Cell(*c) for c in cells))


def test_vertex_conflict():
    cs = detect_conflicts([P((0, 0), (1, 0)), P((2, 0), (1, 0))])
    assert [(c.time, c.agents, c.kind, c.cell_a) for c in cs] == [(1, (0, 1), "vertex", (1, 0))]


def test_swap_conflict():
    cs = detect_conflicts([P((0, 0), (1, 0)), P((1, 0), (0, 0))])
    assert len(cs) == 1
    c = cs[0]
    assert (c.time, c.kind, c.cell_a, c.cell_b) == (0, "edge", (0, 0), (1, 0))


def test_following_is_not_a_conflict():
    assert detect_conflicts([P((0, 0), (1, 0), (2, 0)), P((1, 0), (2, 0), (3, 0))]) == []


def test_unpadded_paths_rejected():
    with pytest.raises(ContractError):
        detect_conflicts([P((0, 0)), P((1, 0), (1, 1))])


def _scan(paths):
    """Independent reference: every (t, a, b) with shared cell or swap."""
    out = set()
    T = len(paths[0].cells)
    for a in range(len(paths)):
        for b in range(len(paths)):
            if a >= b:
                continue
            for t in range(T):
                if paths[a].cells[t] == paths[b].cells[t]:
                    out.add((t, a, b, "vertex"))
                if t + 1 < T and paths[a].cells[t] != paths[b].cells[t] \
                        and paths[a].cells[t] == paths[b].cells[t + 1] \
                        and paths[a].cells[t + 1] == paths[b].cells[t]:
                    out.add((t, a, b, "edge"))
    return out


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_conflict_detection_matches_scan(seed):
    rng = random.Random(seed)
    n, T = rng.randint(2, 4), rng.randint(1, 6)
    paths = []
    for _ in range(n):
        c = (rng.randint(0, 2), rng.randint(0, 2))
        cells = [c]
        for _ in range(T - 1):
            dx, dy = rng.choice([(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)])
            c = (min(2, max(0, c[0] + dx)), min(2, max(0, c[1] + dy)))
            cells.append(c)
        paths.append(P(*cells))
    ref = _scan(paths)
    got = {(c.time, *c.agents, c.kind) for c in detect_conflicts(paths)}
    assert got == ref
    fc = first_conflict(paths)
    if ref:
        assert fc is not None and (fc.time, *fc.agents, fc.kind) == min(
            ref, key=lambda r: (r[0], r[1], r[2], r[3] != "vertex"))
    else:
        assert fc is None
    assert count_conflicts(paths) == len({(a, b) for _, a, b, _ in ref})


def test_implicit_assignment_single_task():
    tasks = [Task(Cell(1, 0), Cell(2, 0))]
    assert implicit_assignment(P((0, 0), (1, 0), (2, 0)), tasks) == [0]


def test_implicit_assignment_chain_same_step():
    tasks = [Task(Cell(1, 0), Cell(2, 0)), Task(Cell(2, 0), Cell(3, 0))]
    assert implicit_assignment(P((0, 0), (1, 0), (2, 0), (3, 0)), tasks) == [0, 1]


def test_implicit_assignment_passing_start_while_busy():
    # carrying task 0 across task 1's start does not pick task 1 up
    tasks = [Task(Cell(0, 0), Cell(2, 0)), Task(Cell(1, 0), Cell(0, 1))]
    assert implicit_assignment(P((0, 0), (1, 0), (2, 0)), tasks) == [0]


def test_shared_start_is_ambiguous():
    tasks = [Task(Cell(1, 0), Cell(2, 0)), Task(Cell(1, 0), Cell(0, 0))]
    with pytest.raises(AmbiguityError):
        implicit_assignment(P((0, 0), (1, 0)), tasks)


def test_joint_replay_consumes_once():
    tasks = [Task(Cell(1, 0), Cell(2, 0))]
    ev = implicit_replay([P((1, 0), (2, 0), (2, 0)), P((0, 1), (0, 0), (1, 0))], tasks)
    assert [e.task for e in ev[0]] == [0] and ev[1] == []


def test_solution_cost_sums_goal_arrivals():
    g = parse_map("\n".join(["." * 10] * 10))
    path0 = Path(tuple(Cell(x, 0) for x in range(7)))  # task 0 done at t=6
    path1 = Path(tuple(Cell(x, 2) for x in range(10)) + tuple(Cell(9, y) for y in range(3, 9)))
    tasks = [Task(Cell(3, 0), Cell(6, 0)), Task(Cell(4, 2), Cell(9, 8))]
    assert solution_cost([path0, path1], tasks, [[0], [1]]) == 6 + 15


def test_problem_contracts():
    g = parse_map("...\n...")
    with pytest.raises(ValueError):
        Task(Cell(0, 0), Cell(0, 0))
    with pytest.raises(ValueError):
        Problem(g, (Cell(5, 5),), (Task(Cell(0, 0), Cell(1, 0)),))
    with pytest.raises(ValueError):
        Problem(parse_map(".#"), (Cell(0, 0),), (Task(Cell(0, 0), Cell(1, 0)),))


# validator ---------------------------------------------------------------

@pytest.fixture
def simple():
    prob = make_problem("....\n....", [(0, 0), (0, 1)], [((1, 0), (3, 0)), ((1, 1), (2, 1))])
    sol = Solution((P((0, 0), (1, 0), (2, 0), (3, 0)), P((0, 1), (1, 1), (2, 1))), (3, 2), 5)
    return prob, sol


def test_valid_solution(simple):
    prob, sol = simple
    assert validate_solution(prob, sol).valid
    assert validate_solution(prob, sol, strict=True).valid


def test_teleport_detected(simple):
    prob, sol = simple
    bad = Solution((P((0, 0), (1, 0), (3, 0), (3, 0)), sol.paths[1]), (2, 2), 4)
    assert ADJACENCY in validate_solution(prob, bad).kinds()


def test_wrong_start_detected(simple):
    prob, sol = simple
    bad = Solution((P((1, 0), (2, 0), (3, 0)), sol.paths[1]), (2, 2), 4)
    assert START in validate_solution(prob, bad).kinds()


def test_collision_detected():
    prob = make_problem("...\n...", [(0, 0), (2, 0)], [((0, 1), (1, 1))])
    bad = Solution((P((0, 0), (1, 0)), P((2, 0), (1, 0), (1, 1), (0, 1), (1, 1))), (4,), 4)
    kinds = validate_solution(prob, bad).kinds()
    assert COLLISION in kinds


def test_missed_task_detected(simple):
    prob, sol = simple
    bad = Solution((P((0, 0), (0, 0)), sol.paths[1]), (3, 2), 5)
    assert UNFULFILLED in validate_solution(prob, bad).kinds()


def test_wrong_cost_detected(simple):
    prob, sol = simple
    assert COST in validate_solution(prob, Solution(sol.paths, (3, 2), 6)).kinds()
    assert validate_solution(prob, Solution(sol.paths, (3, 1), 4)).kinds() & {COST, UNFULFILLED}


def test_cost_invariant_under_padding():
    from tcbs.spacetime import pad_paths
    tasks = [Task(Cell(1, 0), Cell(2, 0)), Task(Cell(0, 1), Cell(0, 2))]
    paths = [P((0, 0), (1, 0), (2, 0)), P((0, 0), (0, 1), (1, 1), (0, 1), (0, 2))]
    assert solution_cost(pad_paths(paths), tasks, [[0], [1]]) == solution_cost(paths, tasks, [[0], [1]]) == 6


def test_detection_symmetric_in_order():
    a, b, c = P((0, 0), (1, 0)), P((1, 0), (0, 0)), P((2, 0), (1, 0))
    fwd = {(c_.time, frozenset(c_.agents)) for c_ in detect_conflicts([a, b, c])}
    rev = {(c_.time, frozenset(2 - i for i in c_.agents)) for c_ in detect_conflicts([c, b, a])}
    assert fwd == rev


def test_planned_paths_round_trip_through_implicit_rule():
    from tcbs.scenario import ScenarioSpec, gen_scenario
    from tcbs.search import solve
    from tcbs.spacetime import Path as _P
    checked = 0
    for seed in range(20):
        prob = gen_scenario(ScenarioSpec(seed, 8, 8, 0.2, 3, 3))
        sol = solve(prob).solution
        for j, tau in enumerate(sol.assignments):
            cells = sol.paths[j].cells
            others = {prob.tasks[i].start for i in range(prob.m_tasks) if i not in tau}
            if others & set(cells):
                continue  # incidental traversal of an unassigned start
            assert implicit_assignment(_P(cells), prob.tasks) == list(tau)
            checked += 1
    assert checked > 30
