"""4-connected grid roadmap with memoized shortest-path distances."""
from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, NamedTuple


class Cell(NamedTuple):
    x: int
    y: int


class MapFormatError(ValueError):
    pass


class DomainError(ValueError):
    pass


class UnreachableError(Exception):
    pass


_MOVES = ((0, -1), (1, 0), (0, 1), (-1, 0))


@dataclass(frozen=True)
class GridMap:
    width: int
    height: int
    obstacles: FrozenSet[Cell] = frozenset()
    # BFS distance fields keyed by source cell; insertion guarded by _lock
    _fields: Dict[Cell, Dict[Cell, int]] = field(
        default_factory=dict, compare=False, repr=False)
    _lock: threading.Lock = field(
        default_factory=threading.Lock, compare=False, repr=False)
    _adj: Dict[Cell, List[Cell]] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "obstacles",
                           frozenset(Cell(*c) for c in self.obstacles))
        if self.width <= 0 or self.height <= 0:
            raise MapFormatError("map must have positive size")
        for c in self.obstacles:
            if not self.in_bounds(c):
                raise MapFormatError(f"obstacle {tuple(c)} out of bounds")
        if len(self.obstacles) >= self.width * self.height:
            raise MapFormatError("map has no free cell")
        for c in self.free_cells():
            self._adj[c] = [n for n in (Cell(c.x + dx, c.y + dy) for dx, dy in _MOVES)
                            if self.is_free(n)]

    def __hash__(self):
        return hash((self.width, self.height, self.obstacles))

    def in_bounds(self, c) -> bool:
        return 0 <= c[0] < self.width and 0 <= c[1] < self.height

    def is_free(self, c) -> bool:
        return self.in_bounds(c) and Cell(*c) not in self.obstacles

    def free_cells(self) -> List[Cell]:
        return [Cell(x, y) for y in range(self.height) for x in range(self.width)
                if Cell(x, y) not in self.obstacles]

    @property
    def area(self) -> int:
        return self.width * self.height

    def to_text(self) -> str:
        return "\n".join(
            "".join("#" if (x, y) in self.obstacles else "." for x in range(self.width))
            for y in range(self.height))

    # distance memo -------------------------------------------------------

    def distance_field(self, source) -> Dict[Cell, int]:
        """Shortest-path lengths from ``source`` to every reachable free cell."""
        source = Cell(*source)
        fld = self._fields.get(source)
        if fld is not None:
            return fld
        fld = _bfs(self, source)
        with self._lock:
            return self._fields.setdefault(source, fld)

    def cached_distance(self, a, b) -> int:
        """Exact distance if either endpoint has a memoized field, else Manhattan."""
        fld = self._fields.get(Cell(*a))
        if fld is None:
            fld = self._fields.get(Cell(*b))
            if fld is None:
                return manhattan(a, b)
            return fld.get(Cell(*a), _INF)
        return fld.get(Cell(*b), _INF)

    def clear_memo(self):
        with self._lock:
            self._fields.clear()


_INF = float("inf")


def _bfs(gmap: GridMap, source: Cell) -> Dict[Cell, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        c = queue.popleft()
        d = dist[c] + 1
        for n in neighbors(gmap, c):
            if n not in dist:
                dist[n] = d
                queue.append(n)
    return dist


def parse_map(text: str) -> GridMap:
    rows = [r for r in text.strip("\n").split("\n")]
    rows = [r.rstrip("\r") for r in rows]
    if not text.strip() or not rows:
        raise MapFormatError("empty map")
    width = len(rows[0])
    obstacles = set()
    for y, row in enumerate(rows):
        if len(row) != width:
            raise MapFormatError(f"row {y} has length {len(row)}, expected {width}")
        for x, ch in enumerate(row):
            if ch == "#":
                obstacles.add(Cell(x, y))
            elif ch != ".":
                raise MapFormatError(f"illegal character {ch!r} at ({x},{y})")
    return GridMap(width, len(rows), frozenset(obstacles))


def neighbors(gmap: GridMap, c) -> List[Cell]:
    """Free N/E/S/W cells adjacent to ``c`` (waiting is not a neighbor)."""
    try:
        return list(gmap._adj[c])
    except (KeyError, TypeError):
        raise DomainError(f"cell {tuple(c)} is not a free in-bounds cell") from None


def manhattan(a, b) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def true_distance(gmap: GridMap, a, b) -> int:
    for c in (a, b):
        if not gmap.is_free(c):
            raise DomainError(f"cell {tuple(c)} is not free")
    a, b = Cell(*a), Cell(*b)
    fld = gmap._fields.get(b)
    if fld is None:
        fld = gmap.distance_field(a)
        d = fld.get(b)
    else:
        d = fld.get(a)
    if d is None:
        raise UnreachableError(f"{tuple(b)} unreachable from {tuple(a)}")
    return d


def connected(gmap: GridMap, cells: Iterable) -> bool:
    cells = [Cell(*c) for c in cells]
    if not cells:
        return True
    fld = gmap.distance_field(cells[0])
    return all(c in fld for c in cells)


def as_cell(c) -> Cell:
    return Cell(int(c[0]), int(c[1]))


