"""Discrete self-similar fractals and their generators.

A generator G is a finite point set in an integer box with (0,0) present,
at least one point in every row and column, a connected full grid graph,
and G a proper subset of its box.  Stage 1 is G itself and stage s+1 is
stage s plus scaled copies of G; the infinite union is the fractal.
Membership in the union has a closed form: every base-(w,h) digit pair of
a point must itself be a point of G.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .errors import (
    BudgetExceeded,
    DegenerateBox,
    EmptyRowOrColumn,
    IndexOutOfRange,
    MissingOrigin,
    NotConnected,
    NotProperSubset,
    ParseError,
)

DEFAULT_POINT_BUDGET = 2_000_000


def point_budget() -> int:
    raw = os.environ.get("FRACTILE_BUDGET")
    if raw:
        try:
            return int(raw)
        except ValueError:
            pass
    return DEFAULT_POINT_BUDGET


@dataclass(frozen=True)
class Generator:
    points: frozenset
    width: int
    height: int
    _rows: dict = field(repr=False, hash=False, compare=False, default=None)
    _cols: dict = field(repr=False, hash=False, compare=False, default=None)

    @property
    def size(self):
        return len(self.points)

    @property
    def g(self):
        return max(self.width, self.height)

    def row(self, y):
        return self._rows[y]

    def col(self, x):
        return self._cols[x]

    # bounding-box side segments
    def side_set(self, side: str):
        w, h = self.width, self.height
        if side == "L":
            return {(0, y) for y in range(h)}
        if side == "R":
            return {(w - 1, y) for y in range(h)}
        if side == "T":
            return {(x, h - 1) for x in range(w)}
        if side == "B":
            return {(x, 0) for x in range(w)}
        raise ValueError(side)

    def enumerate_positions(self):
        """Points in row-major order from the top row down, 1-indexed use."""
        return sorted(self.points, key=lambda p: (-p[1], p[0]))


def _grid_components(points):
    points = set(points)
    comps = []
    left = set(points)
    while left:
        start = left.pop()
        comp = {start}
        stack = [start]
        while stack:
            x, y = stack.pop()
            for nb in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                if nb in left:
                    left.remove(nb)
                    comp.add(nb)
                    stack.append(nb)
        comps.append(frozenset(comp))
    return comps


def validate_generator(points) -> Generator:
    pts = frozenset((int(x), int(y)) for x, y in points)
    if not pts:
        raise MissingOrigin("empty point set")
    if (0, 0) not in pts:
        raise MissingOrigin("(0,0) must be a generator point")
    if any(x < 0 or y < 0 for x, y in pts):
        raise MissingOrigin("generator points must be non-negative")
    w = max(x for x, _ in pts) + 1
    h = max(y for _, y in pts) + 1
    if w <= 1 or h <= 1:
        raise DegenerateBox(f"box {w}x{h}: width and height must both exceed 1")
    rows = {y: frozenset(x for x, yy in pts if yy == y) for y in range(h)}
    cols = {x: frozenset(y for xx, y in pts if xx == x) for x in range(w)}
    for y in range(h):
        if not rows[y]:
            raise EmptyRowOrColumn(f"row {y} has no point")
    for x in range(w):
        if not cols[x]:
            raise EmptyRowOrColumn(f"column {x} has no point")
    if len(pts) == w * h:
        raise NotProperSubset("generator fills its whole bounding box")
    if len(_grid_components(pts)) != 1:
        raise NotConnected("full grid graph of the generator is disconnected")
    return Generator(pts, w, h, rows, cols)


def stage(gen: Generator, s: int, budget: int = None):
    """Exact point set of stage s: X_1 = G, X_{i+1} = X_i + (w^i, h^i) G."""
    if s < 1:
        raise IndexOutOfRange("stage index must be >= 1")
    budget = budget if budget is not None else point_budget()
    if gen.size ** s > budget:
        raise BudgetExceeded(f"stage {s} has {gen.size ** s} points > budget {budget}")
    pts = set(gen.points)
    for i in range(1, s):
        sx, sy = gen.width ** i, gen.height ** i
        pts = {(x + sx * vx, y + sy * vy) for vx, vy in gen.points for x, y in pts}
    return pts


def classify_sides(gen: Generator):
    """Number of bounding-box side segments fully contained in G."""
    full = [s for s in ("L", "R", "T", "B") if gen.side_set(s) <= gen.points]
    return len(full), full


def contains(gen: Generator, p) -> bool:
    """Membership in the infinite fractal via digit decomposition."""
    x, y = p
    if x < 0 or y < 0:
        return False
    w, h = gen.width, gen.height
    while x > 0 or y > 0:
        if (x % w, y % h) not in gen.points:
            return False
        x //= w
        y //= h
    return True  # (0,0) is always a generator point


def position_of(gen: Generator, s: int, i: int):
    """Offset of the stage-s copy at position i (row-major, top row first)."""
    order = gen.enumerate_positions()
    if not 1 <= i <= len(order):
        raise IndexOutOfRange(f"position {i} not in 1..{len(order)}")
    vx, vy = order[i - 1]
    return (gen.width ** s * vx, gen.height ** s * vy)


# -- text format ----------------------------------------------------------

def render_generator(gen: Generator) -> str:
    """ASCII grid; first line is the top row (highest y)."""
    lines = []
    for y in range(gen.height - 1, -1, -1):
        lines.append("".join("#" if (x, y) in gen.points else "."
                             for x in range(gen.width)))
    return "\n".join(lines) + "\n"


def parse_generator(text: str) -> Generator:
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        raise ParseError("empty generator file")
    width = len(rows[0])
    pts = set()
    for r, line in enumerate(rows):
        if len(line) != width:
            raise ParseError(f"ragged grid: line {r + 1} has length {len(line)}")
        y = len(rows) - 1 - r
        for x, ch in enumerate(line):
            if ch == "#":
                pts.add((x, y))
            elif ch != ".":
                raise ParseError(f"unexpected character {ch!r} in grid")
    return validate_generator(pts)


def render_points(points) -> str:
    """ASCII grid of an arbitrary point set (top row first)."""
    pts = set(points)
    minx = min(x for x, _ in pts)
    miny = min(y for _, y in pts)
    maxx = max(x for x, _ in pts)
    maxy = max(y for _, y in pts)
    lines = []
    for y in range(maxy, miny - 1, -1):
        lines.append("".join("#" if (x, y) in pts else "."
                             for x in range(minx, maxx + 1)))
    return "\n".join(lines) + "\n"


# well-known generators
CARPET_POINTS = frozenset(
    (x, y) for x in range(3) for y in range(3) if (x, y) != (1, 1)
)

# the 3-sided generator used for the impossibility result
THREE_SIDED_POINTS = frozenset([
    (0, 4), (1, 4), (2, 4), (3, 4),
    (0, 3), (2, 3),
    (0, 2), (2, 2),
    (0, 1),
    (0, 0), (1, 0), (2, 0), (3, 0),
])


def carpet_generator() -> Generator:
    return validate_generator(CARPET_POINTS)


def three_sided_generator() -> Generator:
    return validate_generator(THREE_SIDED_POINTS)


def ring_generator(w: int, h: int) -> Generator:
    """The full-perimeter generator of a w x h box (interior empty)."""
    pts = {(x, y) for x in range(w) for y in range(h)
           if x in (0, w - 1) or y in (0, h - 1)}
    return validate_generator(pts)
