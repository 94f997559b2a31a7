"""Single-agent planning in space-time under vertex/edge avoidance constraints."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .grid import Cell, DomainError, GridMap, UnreachableError, neighbors

VERTEX = "vertex"
EDGE = "edge"


class InfeasibleError(Exception):
    """The constraints admit no path within the search horizon."""


@dataclass(frozen=True, order=True)
class Constraint:
    """Forbid occupying ``cell_a`` at ``time`` (vertex) or moving
    ``cell_a -> cell_b`` during ``time -> time + 1`` (edge)."""
    kind: str
    cell_a: Cell
    time: int
    cell_b: Optional[Cell] = None

    @classmethod
    def vertex(cls, cell, time: int) -> "Constraint":
        return cls(VERTEX, Cell(*cell), int(time))

    @classmethod
    def edge(cls, a, b, time: int) -> "Constraint":
        return cls(EDGE, Cell(*a), int(time), Cell(*b))


@dataclass(frozen=True)
class Path:
    cells: Tuple[Cell, ...]
    waypoint_arrivals: Tuple[Tuple[int, int], ...] = ()

    @property
    def final_time(self) -> int:
        return len(self.cells) - 1

    def at(self, t: int) -> Cell:
        return self.cells[t] if t < len(self.cells) else self.cells[-1]

    def __len__(self):
        return len(self.cells)


def pad_paths(paths: Sequence[Path]) -> List[Path]:
    """Repeat each path's last cell until all paths share one length."""
    length = max(len(p) for p in paths)
    return [p if len(p) == length else
            Path(p.cells + (p.cells[-1],) * (length - len(p)), p.waypoint_arrivals)
            for p in paths]


class ConflictTable:
    """Occupancy of other agents' paths, used to break ties between
    equal-cost paths in favour of fewer collisions."""

    def __init__(self, paths: Sequence[Path]):
        self.key = tuple(p.cells for p in paths)
        self.occ: Dict[Tuple[Cell, int], int] = {}
        self.moves: Dict[Tuple[Cell, Cell, int], int] = {}
        self.rest: Dict[Cell, List[int]] = {}   # cell -> times from which it stays occupied
        self.last: Dict[Cell, List[float]] = {}  # cell -> last visit time per path
        self.horizon = 0
        for p in paths:
            cells = p.cells
            self.horizon = max(self.horizon, len(cells))
            last = {}
            for t, c in enumerate(cells):
                self.occ[(c, t)] = self.occ.get((c, t), 0) + 1
                last[c] = t
                if t + 1 < len(cells) and cells[t + 1] != c:
                    k = (c, cells[t + 1], t)
                    self.moves[k] = self.moves.get(k, 0) + 1
            self.rest.setdefault(cells[-1], []).append(len(cells))
            last[cells[-1]] = math.inf
            for c, t in last.items():
                self.last.setdefault(c, []).append(t)

    def step(self, a: Cell, b: Cell, t: int) -> int:
        """Collisions caused by moving a -> b during t -> t + 1."""
        n = self.occ.get((b, t + 1), 0)
        for s in self.rest.get(b, ()):
            if t + 1 >= s:
                n += 1
        if a != b:
            n += self.moves.get((b, a, t), 0)
        return n

    def staying(self, c: Cell, t: int) -> int:
        """Paths that occupy ``c`` at some time >= t."""
        return sum(1 for u in self.last.get(c, ()) if u >= t)


@dataclass
class PathPlanner:
    """Constrained multi-waypoint planner with a result cache.

    The objective is the sum of arrival times at the *charged* waypoints
    (by default all of them). After the last waypoint the agent may keep
    moving at no cost until it reaches a cell it can rest on forever, so a
    constraint on the last waypoint after arrival does not delay arrival
    when stepping aside is possible. With ``avoid`` paths, ties in cost go
    to the path with fewer collisions against them.
    """
    gmap: GridMap
    cache: Dict[tuple, Path] = field(default_factory=dict)
    expansions: int = 0

    def plan(self, start, waypoints: Sequence = (), constraints: Iterable[Constraint] = (),
             charged: Optional[Iterable[int]] = None,
             avoid: Optional[Sequence[Path]] = None) -> Path:
        start = Cell(*start)
        waypoints = tuple(Cell(*w) for w in waypoints)
        constraints = frozenset(constraints)
        charged = tuple(range(len(waypoints))) if charged is None else tuple(sorted(set(charged)))
        table = ConflictTable(avoid) if avoid else None
        key = (start, waypoints, charged, constraints, table.key if table else None)
        hit = self.cache.get(key)
        if hit is None:
            hit = self._search(start, waypoints, constraints, charged, table)
            self.cache[key] = hit
        return hit

    # ------------------------------------------------------------------

    def _search(self, start: Cell, wps: Tuple[Cell, ...], constraints: frozenset,
                charged: Tuple[int, ...], table: Optional[ConflictTable] = None) -> Path:
        gmap = self.gmap
        adj = gmap._adj
        for c in (start,) + wps:
            if not gmap.is_free(c):
                raise DomainError(f"cell {tuple(c)} is not free")
        K = len(wps)
        fields = [gmap.distance_field(w) for w in wps]
        legs = []
        prev = start
        for i, w in enumerate(wps):
            d = fields[i].get(prev)
            if d is None:
                raise UnreachableError(f"waypoint {tuple(w)} unreachable from {tuple(prev)}")
            legs.append(d)
            prev = w
        is_charged = [i in charged for i in range(K)]
        # remaining-charged count and summed leg tails, per next-waypoint index k
        cnt = [0] * (K + 1)
        tail = [0] * (K + 1)
        for k in range(K - 1, -1, -1):
            acc = 0
            n = 0
            s = 0
            for i in range(k, K):
                if i > k:
                    acc += legs[i]
                if is_charged[i]:
                    n += 1
                    s += acc
            cnt[k], tail[k] = n, s

        vertex = set()
        edge = set()
        last_vertex: Dict[Cell, int] = {}
        tmax = -1
        for con in constraints:
            tmax = max(tmax, con.time)
            if con.kind == VERTEX:
                vertex.add((con.cell_a, con.time))
                last_vertex[con.cell_a] = max(last_vertex.get(con.cell_a, -1), con.time)
            else:
                edge.add((con.cell_a, con.cell_b, con.time))
        # beyond t_static neither constraints nor other agents change
        t_static = max(tmax, table.horizon if table else -1) + 1
        horizon = t_static + sum(legs) + len(constraints) + gmap.area

        def advance(c, k, t, arrivals):
            while k < K and wps[k] == c:
                arrivals = arrivals + ((k, t),)
                k += 1
            return k, arrivals

        def h(c, k):
            if k == K:
                return 0
            d = fields[k].get(c)
            if d is None:
                return None
            return cnt[k] * d + tail[k]

        if (start, 0) in vertex:
            raise InfeasibleError("start cell is forbidden at time 0")
        k0, arr0 = advance(start, 0, 0, ())
        counter = 1
        # heap entries: (f, collisions, t, y, x, id); id < 0 marks a terminal entry
        open_list = [(h(start, k0), 0, 0, start.y, start.x, counter)]
        nodes = {counter: (start, 0, k0, 0, arr0, None, 0)}
        closed = set()
        while open_list:
            f, conf, t, _, _, nid = heapq.heappop(open_list)
            if nid < 0:
                return _build(nodes, -nid)
            c, _, k, g, arrivals, parent, _ = nodes[nid]
            state = (c, min(t, t_static), k)
            if state in closed:
                continue
            closed.add(state)
            self.expansions += 1
            if table is None and t > tmax:
                # no constraint can bind any more: finish on shortest legs
                return self._finish(nodes, nid, fields)
            if k == K and last_vertex.get(c, -1) < t:
                if table is None:
                    return _build(nodes, nid)
                heapq.heappush(open_list, (g, conf + table.staying(c, t + 1), t, c.y, c.x, -nid))
            if t >= horizon:
                continue
            step_cost = cnt[k]
            nt = t + 1
            for n in [c] + adj[c]:
                if (n, nt) in vertex or (n != c and (c, n, t) in edge):
                    continue
                nk, narr = advance(n, k, nt, arrivals)
                if (n, min(nt, t_static), nk) in closed:
                    continue
                hn = h(n, nk)
                if hn is None:
                    continue
                ng = g + step_cost
                nconf = conf + table.step(c, n, t) if table else 0
                counter += 1
                nodes[counter] = (n, nt, nk, ng, narr, nid, nconf)
                heapq.heappush(open_list, (ng + hn, nconf, nt, n.y, n.x, counter))
        raise InfeasibleError(f"no path from {tuple(start)} within horizon {horizon}")

    def _finish(self, nodes, nid, fields) -> Path:
        c, t, k, _, arrivals, _, _ = nodes[nid]
        tail_cells = []
        while k < len(fields):
            fld = fields[k]
            while fld[c] > 0:
                c = min((n for n in neighbors(self.gmap, c) if fld.get(n) == fld[c] - 1),
                        key=lambda n: (n.y, n.x))
                t += 1
                tail_cells.append(c)
            arrivals = arrivals + ((k, t),)
            k += 1
        return _build(nodes, nid, tail_cells, arrivals)


def _build(nodes, nid, extra=(), arrivals=None) -> Path:
    cells = []
    if arrivals is None:
        arrivals = nodes[nid][4]
    while nid is not None:
        c, _, _, _, _, parent, _ = nodes[nid]
        cells.append(c)
        nid = parent
    cells.reverse()
    return Path(tuple(cells) + tuple(extra), arrivals)


def plan_constrained(gmap: GridMap, start, waypoints: Sequence = (),
                     constraints: Iterable[Constraint] = (),
                     charged: Optional[Iterable[int]] = None) -> Path:
    return PathPlanner(gmap).plan(start, waypoints, constraints, charged)


def violates(path: Path, constraints: Iterable[Constraint]) -> List[Constraint]:
    """Constraints broken by ``path``, counting the rest after its last cell."""
    bad = []
    for con in constraints:
        if con.kind == VERTEX:
            if path.at(con.time) == con.cell_a:
                bad.append(con)
        elif path.at(con.time) == con.cell_a and path.at(con.time + 1) == con.cell_b:
            bad.append(con)
    return bad
