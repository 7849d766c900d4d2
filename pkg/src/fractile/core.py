"""Two-handed tile assembly primitives.

Tiles are unit squares with a glue on each side.  A supertile is a finite
set of positioned tiles considered up to translation; we keep one canonical
representative (bounding-box minimum corner at the origin, cells ordered by
(y, x)).  Stability is a global min-cut condition on the weighted binding
graph, and two supertiles combine when some relative placement is overlap
free and binds with total strength >= tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import DuplicateLocation, NotStableInput, ParseError

# Side indices and unit vectors.
N, E, S, W = 0, 1, 2, 3
SIDE_NAMES = ("N", "E", "S", "W")
DX = (0, 1, 0, -1)
DY = (1, 0, -1, 0)
OPP = (S, W, N, E)

NULL_LABEL = "-"


@dataclass(frozen=True)
class Glue:
    label: str
    strength: int

    def is_null(self):
        return self.strength == 0


NULL_GLUE = Glue(NULL_LABEL, 0)


@dataclass(frozen=True)
class TileType:
    name: str
    north: Glue
    east: Glue
    south: Glue
    west: Glue

    @property
    def glues(self):
        return (self.north, self.east, self.south, self.west)


class TileSet:
    """A finite set of tile types plus a temperature.

    Glues are interned to small integers: two glues interact iff they have
    the same label *and* the same positive strength, so the intern key is
    the (label, strength) pair and id 0 is reserved for anything inert.
    """

    def __init__(self, tiles: Iterable[TileType], temperature: int = 2):
        self.tiles = list(tiles)
        self.temperature = temperature
        self.index_of = {}
        for i, t in enumerate(self.tiles):
            if t.name in self.index_of:
                raise ParseError(f"duplicate tile name {t.name!r}")
            self.index_of[t.name] = i
        self._gid = {(NULL_LABEL, 0): 0}
        self._gid_strength = [0]
        self.tile_gids = []
        for t in self.tiles:
            self.tile_gids.append(tuple(self._intern(g) for g in t.glues))

    def _intern(self, glue: Glue) -> int:
        if glue.strength <= 0:
            return 0
        key = (glue.label, glue.strength)
        gid = self._gid.get(key)
        if gid is None:
            gid = len(self._gid_strength)
            self._gid[key] = gid
            self._gid_strength.append(glue.strength)
        return gid

    def gid_strength(self, gid: int) -> int:
        return self._gid_strength[gid]

    def __len__(self):
        return len(self.tiles)

    # -- exposure ------------------------------------------------------

    def exposure(self, st: "Supertile"):
        """Map (gid, side) -> tuple of cell locations with that glue exposed."""
        cached = st.__dict__.get("_exposure")
        if cached is not None and cached[0] is self:
            return cached[1]
        occupied = st.shape
        out = {}
        for x, y, ti in st.cells:
            gids = self.tile_gids[ti]
            for side in range(4):
                gid = gids[side]
                if gid == 0:
                    continue
                if (x + DX[side], y + DY[side]) in occupied:
                    continue
                out.setdefault((gid, side), []).append((x, y))
        out = {k: tuple(v) for k, v in out.items()}
        object.__setattr__(st, "_exposure", (self, out))
        return out


@dataclass(frozen=True)
class Supertile:
    """Canonical translation class of a positioned tile set.

    cells is a tuple of (x, y, tile_index), sorted by (y, x), translated so
    the bounding-box minimum corner is (0, 0).
    """

    cells: tuple

    @property
    def size(self):
        return len(self.cells)

    @property
    def shape(self):
        cached = self.__dict__.get("_shape")
        if cached is None:
            cached = frozenset((x, y) for x, y, _ in self.cells)
            object.__setattr__(self, "_shape", cached)
        return cached

    def locations(self):
        return [(x, y) for x, y, _ in self.cells]

    def translated(self, dx, dy):
        """Positioned copy as a dict location -> tile index."""
        return {(x + dx, y + dy): ti for x, y, ti in self.cells}


def canonicalize(placements) -> Supertile:
    """Quotient a positioned tile set by translation.

    placements: iterable of ((x, y), tile_index).  Raises DuplicateLocation
    if two tiles share a cell.
    """
    items = list(placements)
    if not items:
        raise ValueError("empty supertile")
    seen = set()
    for (x, y), _ in items:
        if (x, y) in seen:
            raise DuplicateLocation(f"two tiles at {(x, y)}")
        seen.add((x, y))
    minx = min(x for (x, _), _ in items)
    miny = min(y for (_, y), _ in items)
    cells = tuple(sorted(((x - minx, y - miny, ti) for (x, y), ti in items),
                         key=lambda c: (c[1], c[0])))
    return Supertile(cells)


def singleton(ts: TileSet, tile_index: int) -> Supertile:
    return Supertile(((0, 0, tile_index),))


# -- binding graph -------------------------------------------------------

@dataclass(frozen=True)
class BindingGraph:
    vertices: tuple
    edges: tuple  # ((loc_a, loc_b), weight), loc_a < loc_b


def binding_graph(ts: TileSet, st: Supertile) -> BindingGraph:
    loc_to_gids = {(x, y): ts.tile_gids[ti] for x, y, ti in st.cells}
    edges = []
    for (x, y), gids in loc_to_gids.items():
        # only look east and north so each edge is found once
        for side in (E, N):
            nb = (x + DX[side], y + DY[side])
            other = loc_to_gids.get(nb)
            if other is None:
                continue
            g1 = gids[side]
            g2 = other[OPP[side]]
            if g1 != 0 and g1 == g2:
                a, b = sorted([(x, y), nb])
                edges.append(((a, b), ts.gid_strength(g1)))
    verts = tuple(sorted(loc_to_gids))
    return BindingGraph(verts, tuple(sorted(edges)))


def _adjacency(bg: BindingGraph):
    adj = {v: {} for v in bg.vertices}
    for (a, b), w in bg.edges:
        adj[a][b] = adj[a].get(b, 0) + w
        adj[b][a] = adj[b].get(a, 0) + w
    return adj


def _connected(adj) -> bool:
    verts = list(adj)
    if not verts:
        return True
    seen = {verts[0]}
    stack = [verts[0]]
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == len(verts)


def stoer_wagner(adj) -> float:
    """Global minimum cut of a weighted undirected graph.

    adj: dict vertex -> dict neighbour -> weight.  Returns math.inf for a
    single-vertex graph (no cut exists) and 0 for a disconnected one.
    """
    verts = list(adj)
    if len(verts) <= 1:
        return math.inf
    if not _connected(adj):
        return 0
    # work on merged "supervertices"; each entry maps to a weight dict
    g = {v: dict(nbrs) for v, nbrs in adj.items()}
    best = math.inf
    while len(g) > 1:
        # maximum adjacency (minimum cut phase)
        start = next(iter(g))
        in_a = {start}
        w = dict(g[start])
        prev, last = None, start
        while len(in_a) < len(g):
            sel = max((v for v in g if v not in in_a), key=lambda v: w.get(v, 0))
            prev, last = last, sel
            in_a.add(sel)
            best_candidate = w.get(sel, 0)
            for u, wt in g[sel].items():
                if u not in in_a:
                    w[u] = w.get(u, 0) + wt
        best = min(best, best_candidate)
        # merge last into prev
        for u, wt in g[last].items():
            if u == prev:
                continue
            g[prev][u] = g[prev].get(u, 0) + wt
            g[u][prev] = g[u].get(prev, 0) + wt
            del g[u][last]
        g[prev].pop(last, None)
        del g[last]
    return best


def min_cut_strength(bg: BindingGraph):
    """Exact global min cut of the binding graph; inf if only one tile."""
    return stoer_wagner(_adjacency(bg))


def brute_force_min_cut(bg: BindingGraph):
    """Reference oracle: enumerate every nontrivial bipartition (<= ~20 vertices)."""
    verts = list(bg.vertices)
    n = len(verts)
    if n <= 1:
        return math.inf
    idx = {v: i for i, v in enumerate(verts)}
    pair_edges = [((idx[a], idx[b]), w) for (a, b), w in bg.edges]
    best = math.inf
    for mask in range(1, 1 << (n - 1)):  # vertex n-1 always on side 0
        cut = 0
        for (i, j), w in pair_edges:
            if ((mask >> i) & 1) != ((mask >> j) & 1):
                cut += w
        best = min(best, cut)
    return best


class _UF:
    def __init__(self, items):
        self.p = {x: x for x in items}

    def find(self, x):
        r = x
        while self.p[r] != r:
            r = self.p[r]
        while self.p[x] != r:
            self.p[x], x = r, self.p[x]
        return r

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.p[ra] = rb


def is_stable(ts: TileSet, st: Supertile, tau: int) -> bool:
    """tau-stability: every cut of the binding graph weighs >= tau.

    Fast path: contract all edges of weight >= tau first; if everything
    collapses to one supervertex no sub-tau cut can exist.  Otherwise run
    the exact min cut on the (much smaller) contraction.
    """
    if st.size == 1 or tau <= 0:
        return True
    bg = binding_graph(ts, st)
    uf = _UF(bg.vertices)
    for (a, b), w in bg.edges:
        if w >= tau:
            uf.union(a, b)
    contracted = {}
    for v in bg.vertices:
        contracted.setdefault(uf.find(v), {})
    if len(contracted) == 1:
        return True
    for (a, b), w in bg.edges:
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            continue
        contracted[ra][rb] = contracted[ra].get(rb, 0) + w
        contracted[rb][ra] = contracted[rb].get(ra, 0) + w
    return stoer_wagner(contracted) >= tau


# -- two-handed combination ----------------------------------------------

def combination_offsets(ts: TileSet, a: Supertile, b: Supertile, tau: int):
    """Offsets at which a translate of b binds to a with strength >= tau.

    Candidate offsets come only from matching complementary exposed glue
    positions, never from scanning the plane.  Returns {offset: strength}
    for overlap-free offsets meeting the temperature.
    """
    expa = ts.exposure(a)
    expb = ts.exposure(b)
    if len(expb) < len(expa):
        # iterate over the smaller exposure map
        flipped = combination_offsets(ts, b, a, tau)
        return {(-dx, -dy): s for (dx, dy), s in flipped.items()}
    cand = {}
    for (gid, side), pos_a in expa.items():
        pos_b = expb.get((gid, OPP[side]))
        if not pos_b:
            continue
        s = ts.gid_strength(gid)
        dx0, dy0 = DX[side], DY[side]
        for px, py in pos_a:
            tx, ty = px + dx0, py + dy0
            for qx, qy in pos_b:
                off = (tx - qx, ty - qy)
                cand[off] = cand.get(off, 0) + s
    shape_a = a.shape
    out = {}
    for off, strength in cand.items():
        if strength < tau:
            continue
        dx, dy = off
        if any((x + dx, y + dy) in shape_a for x, y, _ in b.cells):
            continue
        out[off] = strength
    return out


def combine_at(a: Supertile, b: Supertile, offset) -> Supertile:
    dx, dy = offset
    placements = [((x, y), ti) for x, y, ti in a.cells]
    placements += [((x + dx, y + dy), ti) for x, y, ti in b.cells]
    return canonicalize(placements)


def combinations(ts: TileSet, a: Supertile, b: Supertile, tau: int,
                 check_stable: bool = True):
    """All tau-combinations of a and b: a set of (offset, result) pairs.

    Both inputs must be tau-stable; every result is tau-stable because any
    cut of the union either separates the two parts (weight >= tau by the
    binding requirement) or induces a cut inside one stable part.
    """
    if check_stable and not (is_stable(ts, a, tau) and is_stable(ts, b, tau)):
        raise NotStableInput("combinations() requires tau-stable inputs")
    return {(off, combine_at(a, b, off))
            for off in combination_offsets(ts, a, b, tau)}


# -- serialization -------------------------------------------------------

def _fmt_glue(g: Glue) -> str:
    if g.strength == 0:
        return "-:0"
    return f"{g.label}:{g.strength}"


def _parse_glue(text: str) -> Glue:
    label, _, strength = text.rpartition(":")
    if not label:
        raise ParseError(f"bad glue {text!r}")
    try:
        s = int(strength)
    except ValueError:
        raise ParseError(f"bad glue strength in {text!r}") from None
    if s < 0:
        raise ParseError(f"negative glue strength in {text!r}")
    if s == 0:
        return NULL_GLUE
    return Glue(label, s)


def write_tileset(ts: TileSet) -> str:
    lines = [f"temperature {ts.temperature}"]
    for t in ts.tiles:
        for g in t.glues:
            if g.strength > 0 and (" " in g.label or ":" in g.label):
                raise ParseError(f"unserializable glue label {g.label!r}")
        lines.append(
            f"tile {t.name}"
            f" N={_fmt_glue(t.north)} E={_fmt_glue(t.east)}"
            f" S={_fmt_glue(t.south)} W={_fmt_glue(t.west)}"
        )
    return "\n".join(lines) + "\n"


def parse_tileset(text: str) -> TileSet:
    temperature = 2
    tiles = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "temperature":
            if len(parts) != 2:
                raise ParseError(f"line {lineno}: bad temperature line")
            temperature = int(parts[1])
            continue
        if parts[0] != "tile" or len(parts) != 6:
            raise ParseError(f"line {lineno}: expected 'tile <name> N=.. E=.. S=.. W=..'")
        name = parts[1]
        glues = {}
        for field in parts[2:]:
            key, _, val = field.partition("=")
            if key not in ("N", "E", "S", "W") or not val:
                raise ParseError(f"line {lineno}: bad field {field!r}")
            glues[key] = _parse_glue(val)
        tiles.append(TileType(name, glues["N"], glues["E"], glues["S"], glues["W"]))
    if not tiles:
        raise ParseError("no tile records found")
    return TileSet(tiles, temperature)
