"""Seeded random scenarios and the scenario/solution JSON formats."""
from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass
from typing import Optional

from .grid import Cell, GridMap, connected, parse_map
from .model import Problem, Solution, Task
from .spacetime import Path


class GenerationError(RuntimeError):
    pass


class FormatError(ValueError):
    pass


MAX_RETRIES = 1000


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int
    width: int = 8
    height: int = 8
    obstacle_density: float = 0.2
    n_agents: int = 3
    m_tasks: int = 2

    def __post_init__(self):
        if not 0 <= self.obstacle_density < 1:
            raise ValueError("obstacle_density must be in [0, 1)")
        if self.width < 1 or self.height < 1 or self.n_agents < 1 or self.m_tasks < 1:
            raise ValueError("sizes and counts must be positive")
        free = self.width * self.height - self.n_obstacles
        if free < self.n_agents + 2 * self.m_tasks:
            raise ValueError(f"{free} free cells cannot hold {self.n_agents} agents "
                             f"and {self.m_tasks} tasks")

    @property
    def n_obstacles(self) -> int:
        return math.floor(self.width * self.height * self.obstacle_density)


def gen_scenario(spec: ScenarioSpec) -> Problem:
    """Deterministic from ``spec.seed``; resamples until every sampled cell is
    mutually reachable."""
    cells = [Cell(x, y) for y in range(spec.height) for x in range(spec.width)]
    need = spec.n_agents + 2 * spec.m_tasks
    for attempt in range(MAX_RETRIES):
        rng = random.Random(spec.seed * 1_000_003 + attempt)
        obstacles = frozenset(rng.sample(cells, spec.n_obstacles))
        gmap = GridMap(spec.width, spec.height, obstacles)
        free = [c for c in cells if c not in obstacles]
        picked = rng.sample(free, need)
        if not connected(gmap, picked):
            continue
        agents = picked[:spec.n_agents]
        rest = picked[spec.n_agents:]
        tasks = [Task(rest[2 * i], rest[2 * i + 1]) for i in range(spec.m_tasks)]
        return Problem(gmap, tuple(agents), tuple(tasks))
    raise GenerationError(f"no connected scenario after {MAX_RETRIES} attempts")


# JSON ----------------------------------------------------------------------

def _pt(c):
    return [int(c[0]), int(c[1])]


def _cell(v, what):
    if not (isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(i, int) for i in v)):
        raise FormatError(f"{what}: expected [x, y], got {v!r}")
    return Cell(*v)


def problem_to_dict(problem: Problem) -> dict:
    g = problem.gmap
    return {
        "map": {"width": g.width, "height": g.height,
                "obstacles": [_pt(c) for c in sorted(g.obstacles, key=lambda c: (c.y, c.x))]},
        "agents": [_pt(c) for c in problem.agent_starts],
        "tasks": [{"start": _pt(t.start), "goal": _pt(t.goal)} for t in problem.tasks],
    }


def problem_from_dict(d: dict, map_text: Optional[str] = None) -> Problem:
    try:
        if map_text is not None:
            gmap = parse_map(map_text)
        else:
            m = d["map"]
            gmap = GridMap(int(m["width"]), int(m["height"]),
                           frozenset(_cell(c, "obstacle") for c in m.get("obstacles", [])))
        agents = tuple(_cell(c, "agent") for c in d["agents"])
        tasks = tuple(Task(_cell(t["start"], "task start"), _cell(t["goal"], "task goal"))
                      for t in d["tasks"])
        return Problem(gmap, agents, tasks)
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"bad scenario: {e}") from e


_PAIR = re.compile(r"\[\s*(-?\d+),\s*(-?\d+)\s*\]")


def _dumps(d: dict) -> str:
    return _PAIR.sub(r"[\1, \2]", json.dumps(d, indent=2, sort_keys=True)) + "\n"


def dump_problem(problem: Problem) -> str:
    return _dumps(problem_to_dict(problem))


def load_problem(text: str, map_text: Optional[str] = None) -> Problem:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e}") from e
    return problem_from_dict(d, map_text)


def solution_to_dict(sol: Solution) -> dict:
    return {
        "paths": [[_pt(c) for c in p.cells] for p in sol.paths],
        "task_completion": [int(t) for t in sol.task_completion],
        "total_cost": int(sol.total_cost),
    }


def solution_from_dict(d: dict) -> Solution:
    try:
        paths = tuple(Path(tuple(_cell(c, "path cell") for c in p)) for p in d["paths"])
        done = tuple(int(t) for t in d["task_completion"])
        return Solution(paths, done, int(d["total_cost"]))
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"bad solution: {e}") from e


def dump_solution(sol: Solution) -> str:
    return _dumps(solution_to_dict(sol))


def load_solution(text: str) -> Solution:
    try:
        return solution_from_dict(json.loads(text))
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e}") from e
