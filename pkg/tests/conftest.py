import pathlib

import pytest

from tcbs.grid import parse_map
from tcbs.model import Problem, Task
from tcbs.scenario import load_problem

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def brute_force_arrivals(gmap, start, waypoints, constraints, horizon):
    """Earliest time every waypoint has been visited in order, found by
    sweeping the full time-expanded graph one layer at a time (None if not
    reached within ``horizon``). No heuristic and no pruning, so it shares
    nothing with the planner under test.
    """
    vertex = {(c.cell_a, c.time) for c in constraints if c.kind == "vertex"}
    edge = {(c.cell_a, c.cell_b, c.time) for c in constraints if c.kind == "edge"}

    def advance(c, k):
        while k < len(waypoints) and c == waypoints[k]:
            k += 1
        return k

    def moves(c):
        x, y = c
        yield c
        for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0)):
            n = type(c)(x + dx, y + dy)
            if 0 <= n.x < gmap.width and 0 <= n.y < gmap.height and n not in gmap.obstacles:
                yield n

    if (start, 0) in vertex:
        return None
    layer = {(start, advance(start, 0))}
    for t in range(horizon + 1):
        if any(k == len(waypoints) for _, k in layer):
            return t
        nxt = set()
        for c, k in layer:
            for n in moves(c):
                if (n, t + 1) in vertex or (n != c and (c, n, t) in edge):
                    continue
                nxt.add((n, advance(n, k)))
        layer = nxt
    return None


@pytest.fixture
def open3():
    return parse_map("...\n...\n...")


@pytest.fixture
def corridor_problem():
    return load_problem((FIXTURES / "corridor.json").read_text())


def make_problem(text, agents, tasks):
    return Problem(parse_map(text), tuple(agents), tuple(Task(s, g) for s, g in tasks))
