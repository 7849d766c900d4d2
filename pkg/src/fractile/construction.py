"""Shared layout engine for fractal tile sets.

Given a 4-sided generator this builds, per position i (the identity a block
takes inside the next stage) and grout class j (the identity the assembled
next stage will take), the hard-coded supertile families:

  * initializers: a glue cycle over the stage-2 seed shape, split into a
    long chain plus a short hook so the final assembly step is forced to be
    a two-glue cooperative join, and so the two start-gadget target glues
    straddle that join;
  * one start-gadget per (i, j) that can bind only to a completed body;
  * crawler chunks that wrap the body one cooperative step at a time and
    expose stage-binding glues plus next-stage surface glues;
  * fill tiles for "late" cells: ring cells past the last cooperative
    anchor of a crawl (tails) and seed fragments the initializer cannot
    hard-code (strands).  Fill tiles bind with two strength-1 relays from
    tiles that are already placed, or chain onto placed fill tiles.

Crawler types are scale free: chunk shapes and glue labels depend only on
boundary residues and on key/terminus geometry, which repeat at every
stage.  Chunks are laid out by scanning the stage-2 and stage-3 rings and
deduplicating; relay labels are derived from the prefix of the crawl that
produced them, so a chunk type has exactly one outgoing relay and no two
types with the same inbound relay and body anchor ever disagree about what
follows them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import DX, DY, E, Glue, N, NULL_GLUE, OPP, S, SIDE_NAMES, TileType, W
from .errors import FillNotAnchorable, NoHamiltonianPath
from .fractal import Generator, contains as fr_contains, stage as fr_stage

# box side-set membership, keyed by the outward direction
_BOX_SIDE = {N: "T", S: "B", E: "R", W: "L"}


# ---------------------------------------------------------------------------
# glue naming


# Whether the indicator glue at a key carries the "hatted" variant of the
# per-identity pair, by (side, key-at-low-coordinate).  Opposite sides pair
# the variants in opposite order, so two bodies can never satisfy both
# cross-matches at one offset and mate with each other: the two same-label
# matches would need offsets differing by twice the key separation.
HAT_AT_KEY = {
    S: {True: False, False: True},
    N: {True: True, False: False},
    E: {True: False, False: True},
    W: {True: True, False: False},
}


class Namer:
    """Systematic glue names for compiled tile sets.

    Subclassed by the carpet module to reproduce the published glue
    vocabulary.  Methods return bare label strings; strengths are decided
    by the layout engine.
    """

    def __init__(self, prefix="f"):
        self.prefix = prefix

    def plain(self, side, residue):
        return f"{self.prefix}/bdry/{SIDE_NAMES[side]}/{residue}"

    def indicator(self, i, side, lo):
        hat = HAT_AT_KEY[side][lo]
        return f"{self.prefix}/ind/{i}/{'b' if hat else 'a'}"

    def stage_glue(self, bond, hat, j):
        a, b = sorted(bond)
        return f"{self.prefix}/h/{a}-{b}/{'t' if hat else 'o'}/{j}"

    def relay(self, i, j, token):
        return f"{self.prefix}/rel/{i}/{j}/{token}"

    def tail_relay(self, i, j, end_id):
        return f"{self.prefix}/tailrel/{i}/{j}/{end_id}"

    def tail_next(self, owner, end_id, tag):
        return f"{self.prefix}/tailnext/{owner}/{end_id}/{tag}"

    def tail_pair(self, tag, key_a, key_b):
        a, b = sorted([key_a, key_b])
        return f"{self.prefix}/tailpair/{tag}/{a}/{b}"

    def strand_relay(self, tag, cell, side):
        return f"{self.prefix}/strandrel/{tag}/{cell[0]}-{cell[1]}/{SIDE_NAMES[side]}"

    def strand_chain(self, tag, a, b):
        (x1, y1), (x2, y2) = sorted([a, b])
        return f"{self.prefix}/fillhc/{tag}/{x1}-{y1}-{x2}-{y2}"

    def init_chain(self, i, k):
        return f"{self.prefix}/hc/{i}/{k}"

    def init_yellow(self, i, which):
        return f"{self.prefix}/y/{i}/{which}"

    def chunk_chain(self, i, j, type_idx, k):
        return f"{self.prefix}/ghc/{i}/{j}/{type_idx}/{k}"

    def gadget_chain(self, i, j):
        return f"{self.prefix}/ghc/{i}/{j}/gadget"

    def tile_init(self, i, k):
        return f"{self.prefix}/init/{i}/{k}"

    def tile_gadget(self, i, j, k):
        return f"{self.prefix}/gadget/{i}/{j}/{k}"

    def tile_chunk(self, i, j, type_idx, k):
        return f"{self.prefix}/grout/{i}/{j}/{type_idx}/{k}"

    def tile_tail(self, i, j, end_id, k):
        return f"{self.prefix}/tail/{i}/{j}/{end_id}/{k}"

    def tile_strand(self, tag, cell):
        return f"{self.prefix}/strand/{tag}/{cell[0]}-{cell[1]}"


# ---------------------------------------------------------------------------
# hamiltonian search (initializer chains)


def _neighbors(cell, cells):
    x, y = cell
    return [nb for nb in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1))
            if nb in cells]


def hamiltonian_path(cells, start, goal, node_budget=4_000_000):
    """Hamiltonian path over `cells` from start to goal, or None.

    DFS ordered by fewest onward options plus a connectivity prune; ample
    for the ring-like seed shapes this package compiles.
    """
    cells = frozenset(cells)
    if start not in cells or goal not in cells:
        return None
    n = len(cells)
    if n == 1:
        return [start] if start == goal else None
    adj = {c: tuple(_neighbors(c, cells)) for c in cells}
    path = [start]
    visited = {start}
    budget = [node_budget]

    def remaining_connected(cur):
        todo_n = n - len(visited)
        seed = None
        for nb in adj[cur]:
            if nb not in visited:
                seed = nb
                break
        if seed is None:
            return False
        seen = {seed}
        stack = [seed]
        while stack:
            c = stack.pop()
            for nb in adj[c]:
                if nb not in visited and nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == todo_n

    def dfs(cur):
        if budget[0] <= 0:
            return False
        budget[0] -= 1
        if len(path) == n:
            return cur == goal
        if not remaining_connected(cur):
            return False
        options = [nb for nb in adj[cur] if nb not in visited]
        options.sort(key=lambda nb: (nb == goal,
                                     sum(1 for m in adj[nb] if m not in visited)))
        for nb in options:
            if nb == goal and len(path) != n - 1:
                continue
            visited.add(nb)
            path.append(nb)
            if dfs(nb):
                return True
            path.pop()
            visited.remove(nb)
        return False

    if dfs(start):
        return list(path)
    return None


def spanning_tree_edges(cells):
    cells = set(cells)
    start = min(cells)
    seen = {start}
    stack = [start]
    edges = []
    while stack:
        c = stack.pop()
        for nb in _neighbors(c, cells):
            if nb not in seen:
                seen.add(nb)
                edges.append((c, nb))
                stack.append(nb)
    return edges


def _components(cells):
    cells = set(cells)
    comps = []
    while cells:
        start = cells.pop()
        comp = {start}
        stack = [start]
        while stack:
            c = stack.pop()
            for nb in _neighbors(c, cells):
                cells.remove(nb)
                comp.add(nb)
                stack.append(nb)
        comps.append(frozenset(comp))
    return comps


def _canon_cells(cells):
    minx = min(x for x, _ in cells)
    miny = min(y for _, y in cells)
    return frozenset((x - minx, y - miny) for x, y in cells)


# ---------------------------------------------------------------------------
# layout geometry


@dataclass
class TailRecord:
    """Late ring cells at one end of a crawl arc, in scale-free form.

    line: ring side the cells lie on (N/E/S/W line of the box).
    end_lo: True when the cells sit at the low-coordinate end of that line.
    dists: distances from the box corner along the line, ascending; the
    cell nearest the corner is the arc end, the one with the largest
    distance abuts the last timely chunk.
    """
    line: int
    end_lo: bool
    dists: tuple

    @property
    def end_id(self):
        return f"{SIDE_NAMES[self.line]}{'lo' if self.end_lo else 'hi'}"

    def cells(self, bw, bh):
        out = []
        for d in self.dists:
            if self.line == S:
                out.append((d if self.end_lo else bw - 1 - d, 0))
            elif self.line == N:
                out.append((d if self.end_lo else bw - 1 - d, bh - 1))
            elif self.line == W:
                out.append((0, d if self.end_lo else bh - 1 - d))
            else:
                out.append((bw - 1, d if self.end_lo else bh - 1 - d))
        return out


class Layout:
    """All derived geometry for one generator."""

    def __init__(self, gen: Generator, namer: Namer = None,
                 sigma_phi=None, kills=None):
        self.gen = gen
        self.namer = namer or Namer()
        self.w = gen.width
        self.h = gen.height
        order = gen.enumerate_positions()
        self.positions = {i + 1: p for i, p in enumerate(order)}
        self.pos_of = {p: i + 1 for i, p in enumerate(order)}
        self.r = len(order)

        self.neighbor = {}
        for i, (x, y) in self.positions.items():
            for side in (N, E, S, W):
                self.neighbor[(i, side)] = self.pos_of.get(
                    (x + DX[side], y + DY[side]))
        self.indicator_sides = {
            i: tuple(s for s in (N, E, S, W) if self.neighbor[(i, s)] is not None)
            for i in self.positions
        }
        self.box_sides = {
            i: tuple(d for d in (N, E, S, W)
                     if self.positions[i] in gen.side_set(_BOX_SIDE[d]))
            for i in self.positions
        }

        # middle columns/rows whose flanking grout lines carry the
        # next-stage key glues
        self.p_col = min(max(1, self.w // 2), self.w - 2)
        self.q_row = min(max(1, self.h // 2), self.h - 2)
        self.beta = {
            N: self.pos_of[(self.p_col, self.h - 1)],
            S: self.pos_of[(self.p_col, 0)],
            E: self.pos_of[(self.w - 1, self.q_row)],
            W: self.pos_of[(0, self.q_row)],
        }

        self._g_c = None
        self._strands = None
        self._compute_seed()

        self.sigma_phi = dict(sigma_phi) if sigma_phi else self._choose_sigma_phi()
        if sigma_phi:
            for j, sp in self.sigma_phi.items():
                if not self._fronts_ok(j, sp):
                    raise NoHamiltonianPath(
                        f"supplied start-gadget designation {sp} fails for {j}")
        self.last_block = {j: self._flank_block(j) for j in self.positions}
        self.kills = dict(kills) if kills else self._default_kills()

        # tails are identity-specific but class- and scale-free
        self.tails = {i: self._compute_tails(i) for i in self.positions}

    # -- seed -------------------------------------------------------------

    def _compute_seed(self):
        gen = self.gen
        x2 = fr_stage(gen, 2)
        bw, bh = self.w ** 2, self.h ** 2
        inner = {c for c in x2 if 0 < c[0] < bw - 1 and 0 < c[1] < bh - 1}
        comps = _components(inner)
        gint = {p for p in gen.points
                if 0 < p[0] < self.w - 1 and 0 < p[1] < self.h - 1}
        gint_canon = {_canon_cells(c) for c in _components(gint)} if gint else set()
        main = [c for c in comps if _canon_cells(c) not in gint_canon]
        if len(main) != 1:
            raise NoHamiltonianPath(
                f"expected exactly one seed component, found {len(main)}")
        self._g_c = main[0]
        self._strands = sorted(
            (c for c in comps if c is not main[0]), key=min)

    def seed_cells(self):
        return self._g_c

    def strands(self):
        return self._strands

    # -- designation -------------------------------------------------------

    def _flank_block(self, j):
        sigma, phi = self.sigma_phi[j]
        bx, by = self.positions[self.beta[sigma]]
        return self.pos_of[(bx + DX[phi], by + DY[phi])]

    def _choose_sigma_phi(self):
        out = {}
        for j in self.positions:
            chosen = None
            for sigma in (S, E, N, W):
                if self.neighbor[(j, sigma)] is None:
                    continue
                for phi in ((E, W) if sigma in (N, S) else (N, S)):
                    bx, by = self.positions[self.beta[sigma]]
                    ell = self.pos_of.get((bx + DX[phi], by + DY[phi]))
                    if ell is None or ell == self.beta[sigma]:
                        continue
                    if len(self.indicator_sides[ell]) < 2:
                        continue
                    if not self._connected_without(ell):
                        continue
                    if not self._fronts_ok(j, (sigma, phi)):
                        continue
                    chosen = (sigma, phi)
                    break
                if chosen:
                    break
            if chosen is None:
                raise NoHamiltonianPath(f"no valid start-gadget side for class {j}")
            out[j] = chosen
        return out

    def _fronts_ok(self, i, override):
        """Both crawl scales must leave the gadget mid-arc, anchor every
        front at least once, and end open arcs in anchorless tail runs."""
        for s in (2, 3):
            bw, bh = self.w ** s, self.h ** s
            try:
                gd = _gadget_geometry(self, i, s, override=override)
                flank = self.surface_glue(i, gd["sigma"], gd["flank_body"], s)
                if flank is None or flank[1] != "plain":
                    return False
                key = self.surface_glue(i, gd["sigma"], gd["key_body"], s)
                if key is None or key[1] != "key":
                    return False
                _arc, fronts, _gd, closed = arc_and_fronts(self, i, s,
                                                           override=override)
            except (AssertionError, ValueError):
                return False
            for front in fronts:
                if not front:
                    return False
                anchored = [self._timely_anchor(i, c, s, bw, bh) for c in front]
                if not any(anchored):
                    return False
                if not closed and anchored[-1]:
                    return False
        return True

    def _connected_without(self, ell):
        pts = {p for i, p in self.positions.items() if i != ell}
        start = next(iter(pts))
        seen = {start}
        stack = [start]
        while stack:
            x, y = stack.pop()
            for nb in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                if nb in pts and nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == len(pts)

    def _default_kills(self):
        kills = {}
        for j in self.positions:
            ell = self.last_block[j]
            dead = set()
            for side in self.indicator_sides[ell]:
                nb = self.neighbor[(ell, side)]
                dead.add((frozenset((ell, nb)), False))
            kills[j] = frozenset(dead)
        return kills

    # -- surface language ---------------------------------------------------

    def surface_residues(self, side):
        if side == S:
            return self.gen.row(1)
        if side == N:
            return self.gen.row(self.h - 2)
        if side == W:
            return self.gen.col(1)
        return self.gen.col(self.w - 2)

    def keys(self, side, s):
        """Key coordinates (x for N/S, y for E/W) at stage s: (lo, hi)."""
        if side in (N, S):
            base, p = self.w ** (s - 1), self.p_col
        else:
            base, p = self.h ** (s - 1), self.q_row
        return (base * p, base * (p + 1) - 1)

    def _surface_along(self, side, cell, s):
        bw, bh = self.w ** s, self.h ** s
        x, y = cell
        if side == S and y == 1 and 1 <= x <= bw - 2:
            return x
        if side == N and y == bh - 2 and 1 <= x <= bw - 2:
            return x
        if side == W and x == 1 and 1 <= y <= bh - 2:
            return y
        if side == E and x == bw - 2 and 1 <= y <= bh - 2:
            return y
        return None

    def surface_cell_exists(self, side, cell, s):
        along = self._surface_along(side, cell, s)
        if along is None:
            return None
        res = along % (self.w if side in (N, S) else self.h)
        if res not in self.surface_residues(side):
            return None
        return along, res

    def is_strand_residue(self, cell):
        if not self._strands:
            return False
        r = (cell[0] % (self.w ** 2), cell[1] % (self.h ** 2))
        return any(r in s for s in self._strands)

    def surface_glue(self, i, side, cell, s, tag=None):
        """Glue presented by body cell `cell` on its `side` face at stage s.

        Returns (label, kind) with kind in {"plain", "key", "strand"}, or
        None off the surface.  Strand cells are produced late by fill tiles
        and present relay glues instead of boundary glues; everything else
        follows the residue/key formulas regardless of when the producing
        tile arrives.
        """
        hit = self.surface_cell_exists(side, cell, s)
        if hit is None:
            return None
        along, res = hit
        if self.is_strand_residue(cell):
            r = (cell[0] % (self.w ** 2), cell[1] % (self.h ** 2))
            return (self.namer.strand_relay(tag, r, side), "strand")
        lo, hi = self.keys(side, s)
        if along in (lo, hi) and self.neighbor[(i, side)] is not None:
            return (self.namer.indicator(i, side, along == lo), "key")
        return (self.namer.plain(side, res), "plain")

    def stage_glue(self, i, side, lo, j):
        nb = self.neighbor[(i, side)]
        bond = frozenset((i, nb))
        hat = not lo
        strength = 0 if (bond, hat) in self.kills[j] else 1
        return self.namer.stage_glue(bond, hat, j), strength

    # -- tails ---------------------------------------------------------------

    def _compute_tails(self, i):
        """Scale-free records of anchorless arc-end runs for identity i."""
        s = 3
        bw, bh = self.w ** s, self.h ** s
        arc, fronts, _gd, closed = arc_and_fronts(self, i, s)
        records = []
        for front in fronts:
            if not front:
                continue
            run = []
            for c in front:
                if self._timely_anchor(i, c, s, bw, bh):
                    run = []
                else:
                    run.append(c)
            if run and not closed:
                records.append(self._tail_record(run, bw, bh, i))
        return tuple(records)

    def _timely_anchor(self, i, ring_cell, s, bw, bh):
        got = inward_of(ring_cell, bw, bh)
        if not got:
            return False
        body_cell, surf_side = got
        if self.surface_cell_exists(surf_side, body_cell, s) is None:
            return False
        # strand cells never anchor; cells produced late by sub-crawl fill
        # tiles still anchor (the crawl simply stalls until they arrive)
        return not self.is_strand_residue(body_cell)

    def _tail_record(self, run, bw, bh, i):
        xs = {c[0] for c in run}
        ys = {c[1] for c in run}
        if ys == {0}:
            line, span, along = S, bw, sorted(xs)
        elif ys == {bh - 1}:
            line, span, along = N, bw, sorted(xs)
        elif xs == {0}:
            line, span, along = W, bh, sorted(ys)
        elif xs == {bw - 1}:
            line, span, along = E, bh, sorted(ys)
        else:
            raise NoHamiltonianPath(
                f"identity {i}: corner-wrapping tail {run} unsupported")
        if along[-1] < span // 2:
            return TailRecord(line, True, tuple(along))
        if along[0] > span // 2:
            return TailRecord(line, False, tuple(span - 1 - a for a in reversed(along)))
        raise NoHamiltonianPath(f"identity {i}: tail {run} spans half the box")


# ---------------------------------------------------------------------------
# ring walking


def ring_cells_ccw(bw, bh):
    cells = [(x, 0) for x in range(bw)]
    cells += [(bw - 1, y) for y in range(1, bh)]
    cells += [(x, bh - 1) for x in range(bw - 2, -1, -1)]
    cells += [(0, y) for y in range(bh - 2, 0, -1)]
    return cells


def excluded_ring_cell(lay: Layout, i, cell, bw, bh):
    x, y = cell
    box = lay.box_sides[i]
    return ((x == 0 and W in box) or (x == bw - 1 and E in box)
            or (y == 0 and S in box) or (y == bh - 1 and N in box))


def inward_of(cell, bw, bh):
    """(body cell, surface side) adjacent to a ring cell, or None at corners."""
    x, y = cell
    if y == 0 and 0 < x < bw - 1:
        return ((x, 1), S)
    if y == bh - 1 and 0 < x < bw - 1:
        return ((x, bh - 2), N)
    if x == 0 and 0 < y < bh - 1:
        return ((1, y), W)
    if x == bw - 1 and 0 < y < bh - 1:
        return ((bw - 2, y), E)
    return None


def _gadget_geometry(lay: Layout, i, s, override=None):
    sigma, phi = override if override else lay.sigma_phi[i]
    lo, hi = lay.keys(sigma, s)
    use_lo = phi in (W, S)
    key_along = lo if use_lo else hi
    flank_along = key_along + (1 if phi in (E, N) else -1)
    bw, bh = lay.w ** s, lay.h ** s
    if sigma == S:
        body, ring = (lambda a: (a, 1)), (lambda a: (a, 0))
    elif sigma == N:
        body, ring = (lambda a: (a, bh - 2)), (lambda a: (a, bh - 1))
    elif sigma == W:
        body, ring = (lambda a: (1, a)), (lambda a: (0, a))
    else:
        body, ring = (lambda a: (bw - 2, a)), (lambda a: (bw - 1, a))
    return {
        "sigma": sigma, "phi": phi, "use_lo": use_lo,
        "key_body": body(key_along), "flank_body": body(flank_along),
        "key_ring": ring(key_along), "flank_ring": ring(flank_along),
    }


def arc_and_fronts(lay: Layout, i, s, override=None):
    """Ordered covered arc and the walk fronts leaving the gadget.

    Returns (arc, fronts, gadget_geometry, closed) where each front is a
    list of ring cells walked away from the gadget, and closed marks the
    full-ring (interior identity) case with its single front.
    """
    bw, bh = lay.w ** s, lay.h ** s
    ring = ring_cells_ccw(bw, bh)
    n = len(ring)
    covered = {c for c in ring if not excluded_ring_cell(lay, i, c, bw, bh)}
    gd = _gadget_geometry(lay, i, s, override=override)
    g_key, g_flank = gd["key_ring"], gd["flank_ring"]
    assert g_key in covered and g_flank in covered

    if len(covered) == n:
        k1 = ring.index(g_key)
        rot = ring[k1:] + ring[:k1]
        if rot[1] != g_flank:
            rot = [rot[0]] + rot[:0:-1]
        assert rot[1] == g_flank
        return rot, [rot[2:]], gd, True
    start = next(k for k in range(n)
                 if ring[k] in covered and ring[(k - 1) % n] not in covered)
    arc = []
    k = start
    while ring[k % n] in covered and len(arc) < len(covered):
        arc.append(ring[k % n])
        k += 1
    assert len(arc) == len(covered), "covered ring cells are not contiguous"
    ia, ib = arc.index(g_key), arc.index(g_flank)
    assert abs(ia - ib) == 1
    lo_i, hi_i = min(ia, ib), max(ia, ib)
    return arc, [list(reversed(arc[:lo_i])), arc[hi_i + 1:]], gd, False


# ---------------------------------------------------------------------------
# crawl planning


@dataclass
class ChunkSpec:
    """One crawler supertile: an ordered run of ring cells plus glue faces."""
    cells: list
    faces: dict = field(default_factory=dict)  # (cell, side) -> (label, strength)

    def signature(self):
        ox, oy = self.cells[0]
        rel_cells = tuple((x - ox, y - oy) for x, y in self.cells)
        faces = tuple(sorted(((c[0] - ox, c[1] - oy, side, lab, st)
                              for (c, side), (lab, st) in self.faces.items())))
        return (rel_cells, faces)


@dataclass
class TailPlan:
    """Anchorless cells at a front end, to be produced by fill tiles."""
    record: TailRecord    # None for the trailing run of a closed ring
    cells: list           # walk order: adjacent-to-last-chunk first
    emitter_label: str    # dangling out-relay of the preceding chunk/gadget
    prev_cell: tuple      # cell carrying that dangling relay
    faces: dict           # faces accumulated during the walk (strand relays etc.)


@dataclass
class CrawlPlan:
    gadget: ChunkSpec
    chunks: list
    tails: list
    key_cover_in: dict    # (side, lo) -> in-relay label of the covering chunk


def _dir_from(src, dst):
    dx, dy = dst[0] - src[0], dst[1] - src[1]
    for side in (N, E, S, W):
        if (DX[side], DY[side]) == (dx, dy):
            return side
    raise ValueError(f"{src} and {dst} are not adjacent")


def _anchor_token(side, desc):
    kind = desc[0]
    if kind == "key":
        return f"{SIDE_NAMES[side]}K{'a' if desc[1] else 'b'}"
    return f"{SIDE_NAMES[side]}{desc[1]}"


def plan_crawl(lay: Layout, i, j, s):
    """Lay out the class-j crawl around the identity-i body at scale s.

    Chunks cooperate via one relay from their predecessor plus one body
    glue; their outgoing relay label depends only on the anchor they carry,
    which keeps the type set finite and identical across stages.
    """
    bw, bh = lay.w ** s, lay.h ** s
    arc, fronts, gd, closed = arc_and_fronts(lay, i, s)
    sigma, use_lo = gd["sigma"], gd["use_lo"]
    g_key, g_flank = gd["key_ring"], gd["flank_ring"]
    namer = lay.namer
    tag = j if s == 2 else i   # class completing the structures under this crawl

    gadget = ChunkSpec(cells=[g_key, g_flank])
    key_label = namer.indicator(i, sigma, use_lo)
    flank_glue = lay.surface_glue(i, sigma, gd["flank_body"], s)
    assert flank_glue is not None and flank_glue[1] == "plain", \
        f"identity {i}: start-gadget flank must sit on a plain surface glue"
    inward = OPP[sigma]
    gadget.faces[(g_key, inward)] = (key_label, 1)
    gadget.faces[(g_flank, inward)] = (flank_glue[0], 1)
    glab, gstr = lay.stage_glue(i, sigma, use_lo, j)
    if gstr > 0:
        gadget.faces[(g_key, sigma)] = (glab, gstr)

    plan = CrawlPlan(gadget=gadget, chunks=[], tails=[], key_cover_in={})

    for front in fronts:
        if not front:
            raise NoHamiltonianPath(
                f"identity {i}: start-gadget sits at an arc end")
        start_cell = g_key if _adjacent(front[0], g_key) else g_flank
        out_label = namer.relay(i, j, "Gk" if start_cell is g_key else "Gf")
        gadget.faces[(start_cell, _dir_from(start_cell, front[0]))] = (out_label, 1)

        prev_cell, in_label = start_cell, out_label
        cur = ChunkSpec(cells=[])
        for idx, c in enumerate(front):
            if not cur.cells:
                cur.faces[(c, _dir_from(c, prev_cell))] = (in_label, 1)
            cur.cells.append(c)
            iw = inward_of(c, bw, bh)
            if iw is None:
                continue
            body_cell, surf = iw
            sg = lay.surface_glue(i, surf, body_cell, s, tag=tag)
            if sg is None:
                continue
            label, kind = sg
            cur.faces[(c, OPP[surf])] = (label, 1)
            along, _res = lay.surface_cell_exists(surf, body_cell, s)
            lo, hi = lay.keys(surf, s)
            if along in (lo, hi):
                if lay.neighbor[(i, surf)] is not None:
                    hlab, hstr = lay.stage_glue(i, surf, along == lo, j)
                    if hstr > 0:
                        cur.faces[(c, surf)] = (hlab, hstr)
                plan.key_cover_in[(surf, along == lo)] = in_label
            if kind == "strand":
                continue
            # close the chunk at its anchor; the outgoing relay label only
            # depends on the anchor so chunk types recur at every stage
            anchor = (surf, ("key", along == lo) if kind == "key"
                      else ("plain", along % (lay.w if surf in (N, S) else lay.h)))
            out_label = namer.relay(i, j, _anchor_token(*anchor))
            nxt = front[idx + 1] if idx + 1 < len(front) else (
                g_key if closed else None)
            if nxt is not None:
                cur.faces[(c, _dir_from(c, nxt))] = (out_label, 1)
            plan.chunks.append(cur)
            prev_cell, in_label = c, out_label
            cur = ChunkSpec(cells=[])
        if cur.cells:
            if closed:
                # trailing run abuts the gadget's key-side cell, whose spare
                # relay becomes a second contact for these fill tiles
                rec = None
                spare = namer.relay(i, j, "Gk")
                last = cur.cells[-1]
                gadget.faces[(g_key, _dir_from(g_key, last))] = (spare, 1)
                cur.faces[(last, _dir_from(last, g_key))] = (spare, 1)
            else:
                rec = lay._tail_record(cur.cells, bw, bh, i)
            plan.tails.append(TailPlan(record=rec, cells=list(cur.cells),
                                       emitter_label=in_label,
                                       prev_cell=prev_cell,
                                       faces=dict(cur.faces)))
        elif not closed:
            raise NoHamiltonianPath(
                f"identity {i} scale {s}: front ends on an anchored cell; "
                "next-stage surface glues would be unplaceable")
    return plan


def _adjacent(a, b):
    return abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1


def block_offset(lay: Layout, i, s):
    vx, vy = lay.positions[i]
    return (lay.w ** s * vx, lay.h ** s * vy)


def next_surface_label(lay: Layout, j, cell, side, s_next):
    """Surface glue the class-j assembly presents at `cell` facing `side`.

    `cell` is in the stage-s_next frame; returns None when the position is
    not on that stage's surface.
    """
    hit = lay.surface_cell_exists(side, cell, s_next)
    if hit is None:
        return None
    along, res = hit
    lo, hi = lay.keys(side, s_next)
    if along in (lo, hi) and lay.neighbor[(j, side)] is not None:
        return lay.namer.indicator(j, side, along == lo)
    return lay.namer.plain(side, res)


# ---------------------------------------------------------------------------
# whole-construction assembly


@dataclass
class ConstructionResult:
    tiles: list                  # TileType, deterministic order
    roles: dict                  # name -> (role, i, j)
    seed_layout: dict            # i -> list of ((x, y), tile name)
    gadget_layout: dict          # (i, j) -> list of ((x, y), name) at scale 2
    key_cover: dict              # (i, j) -> {(side, lo): in-relay label}
    layout: Layout

    def tile_count(self):
        return len(self.tiles)


def _tiles_from_spec(cells, faces, edge_glues, names):
    """Build TileType records for a connected run of cells.

    faces: (cell, side) -> (label, strength) for external faces.
    edge_glues: frozenset({a, b}) -> (label, strength) for internal bonds.
    """
    cellset = set(cells)
    out = []
    for cell in cells:
        glues = []
        for side in (N, E, S, W):
            nb = (cell[0] + DX[side], cell[1] + DY[side])
            if nb in cellset:
                lab = edge_glues.get(frozenset((cell, nb)))
                glues.append(Glue(*lab) if lab else NULL_GLUE)
            else:
                lab = faces.get((cell, side))
                glues.append(Glue(*lab) if lab and lab[1] > 0 else NULL_GLUE)
        out.append(TileType(names[cell], *glues))
    return out


def build_construction(gen: Generator, namer: Namer = None,
                       sigma_phi=None, kills=None) -> ConstructionResult:
    lay = Layout(gen, namer or Namer(), sigma_phi=sigma_phi, kills=kills)
    nm = lay.namer
    tiles = []
    roles = {}
    seed_layout = {}
    gadget_layout = {}
    key_cover = {}

    # -- initializers ------------------------------------------------------
    seed = lay.seed_cells()
    for i in sorted(lay.positions):
        gd = _gadget_geometry(lay, i, 2)
        key_body, flank_body = gd["key_body"], gd["flank_body"]
        if key_body not in seed or flank_body not in seed:
            raise NoHamiltonianPath(
                f"identity {i}: start-gadget anchors missing from the seed")
        cycle = hamiltonian_path(seed, key_body, flank_body)
        if cycle is None:
            raise NoHamiltonianPath(
                f"identity {i}: seed shape admits no hamiltonian cycle "
                f"through the start-gadget edge")
        n = len(cycle)
        assert n >= 6 and _adjacent(cycle[-1], cycle[0])
        edge_glues = {}
        for k in range(n - 4):
            edge_glues[frozenset((cycle[k], cycle[k + 1]))] = (nm.init_chain(i, k), 2)
        edge_glues[frozenset((cycle[n - 4], cycle[n - 3]))] = (nm.init_yellow(i, "a"), 1)
        for k in (n - 3, n - 2):
            edge_glues[frozenset((cycle[k], cycle[k + 1]))] = (nm.init_chain(i, k - 1), 2)
        edge_glues[frozenset((cycle[n - 1], cycle[0]))] = (nm.init_yellow(i, "b"), 1)

        faces = {}
        for cell in cycle:
            for side in (N, E, S, W):
                nb = (cell[0] + DX[side], cell[1] + DY[side])
                if nb in seed:
                    continue
                sg = lay.surface_glue(i, side, cell, 2)
                if sg is not None:
                    faces[(cell, side)] = (sg[0], 1)
        names = {cell: nm.tile_init(i, k) for k, cell in enumerate(cycle)}
        new = _tiles_from_spec(cycle, faces, edge_glues, names)
        tiles.extend(new)
        for t in new:
            roles[t.name] = ("initializer", i, None)
        seed_layout[i] = [(cell, names[cell]) for cell in cycle]

    # -- grout: gadgets and crawler chunks ----------------------------------
    tail_plans = {}   # (i, j) -> {end_id: TailPlan at scale 2}
    for i in sorted(lay.positions):
        for j in sorted(lay.positions):
            p3 = plan_crawl(lay, i, j, 3)
            p2 = plan_crawl(lay, i, j, 2)
            assert p3.gadget.signature() == p2.gadget.signature(), \
                f"start-gadget for ({i},{j}) is not scale-free"
            key_cover[(i, j)] = dict(p3.key_cover_in)

            gadget = p2.gadget
            gnames = {cell: nm.tile_gadget(i, j, k)
                      for k, cell in enumerate(gadget.cells)}
            edge = {frozenset(gadget.cells): (nm.gadget_chain(i, j), 2)}
            new = _tiles_from_spec(gadget.cells, gadget.faces, edge, gnames)
            tiles.extend(new)
            for t in new:
                roles[t.name] = ("start-gadget", i, j)
            gadget_layout[(i, j)] = [(c, gnames[c]) for c in gadget.cells]

            seen = {}
            for chunk in p3.chunks + p2.chunks:
                sig = chunk.signature()
                if sig in seen:
                    continue
                t_idx = len(seen)
                seen[sig] = t_idx
                cnames = {cell: nm.tile_chunk(i, j, t_idx, k)
                          for k, cell in enumerate(chunk.cells)}
                edges = {}
                for k in range(len(chunk.cells) - 1):
                    a, b = chunk.cells[k], chunk.cells[k + 1]
                    assert _adjacent(a, b)
                    edges[frozenset((a, b))] = (nm.chunk_chain(i, j, t_idx, k), 2)
                new = _tiles_from_spec(chunk.cells, chunk.faces, edges, cnames)
                tiles.extend(new)
                for t in new:
                    roles[t.name] = ("crawler", i, j)

            by_end_3 = {tp.record.end_id: tp for tp in p3.tails if tp.record}
            by_end_2 = {tp.record.end_id: tp for tp in p2.tails if tp.record}
            assert set(by_end_3) == set(by_end_2), \
                f"({i},{j}): tails differ across scales"
            for end_id, tp2 in by_end_2.items():
                assert by_end_3[end_id].record == tp2.record
                assert by_end_3[end_id].emitter_label == tp2.emitter_label
            tail_plans[(i, j)] = by_end_2
            closed_tails = [tp for tp in p2.tails if tp.record is None]
            for k, tp in enumerate(closed_tails):
                tail_plans[(i, j)][f"ring{k}"] = tp

    # -- fill tiles for tails ------------------------------------------------
    # global (stage-3 frame) map of tail cells for cross-block pairing
    s_asm = 3
    global_tails = {}
    for (i, j), ends in tail_plans.items():
        off = block_offset(lay, i, 2)
        for end_id, tp in ends.items():
            for k, cell in enumerate(tp.cells):
                g = (cell[0] + off[0], cell[1] + off[1])
                global_tails.setdefault(j, {})[g] = (i, end_id, k)

    for (i, j), ends in sorted(tail_plans.items()):
        off = block_offset(lay, i, 2)
        peers = global_tails.get(j, {})
        for end_id, tp in sorted(ends.items()):
            faces = dict(tp.faces)
            cellset = set(tp.cells)
            names = {}
            for k, cell in enumerate(tp.cells):
                names[cell] = nm.tile_tail(i, j, end_id, k)
                me = f"{i}.{end_id}.{k}"
                g = (cell[0] + off[0], cell[1] + off[1])
                for side in (N, E, S, W):
                    nb = (cell[0] + DX[side], cell[1] + DY[side])
                    if nb in cellset or (cell, side) in faces:
                        continue
                    if nb == tp.prev_cell:
                        faces[(cell, side)] = (tp.emitter_label, 1)
                        continue
                    ng = (g[0] + DX[side], g[1] + DY[side])
                    peer = peers.get(ng)
                    if peer is not None:
                        other = f"{peer[0]}.{peer[1]}.{peer[2]}"
                        faces[(cell, side)] = (nm.tail_pair(j, me, other), 2)
                        continue
                    if not fr_contains(lay.gen, ng):
                        continue
                    bw1, bh1 = lay.w ** s_asm, lay.h ** s_asm
                    if ng[0] in (0, bw1 - 1) or ng[1] in (0, bh1 - 1):
                        lab = next_surface_label(lay, j, g, side, s_asm)
                        if lab is not None:
                            faces[(cell, side)] = (lab, 1)
                    # interior sibling grout: no glue
            edges = {}
            for k in range(len(tp.cells) - 1):
                a, b = tp.cells[k], tp.cells[k + 1]
                if _adjacent(a, b):
                    ka = f"{i}.{end_id}.{k}"
                    kb = f"{i}.{end_id}.{k + 1}"
                    edges[frozenset((a, b))] = (nm.tail_pair(j, ka, kb), 2)
            new = _tiles_from_spec(tp.cells, faces, edges, names)
            tiles.extend(new)
            for t in new:
                roles[t.name] = ("fill", i, j)

    # -- fill tiles for strands ----------------------------------------------
    x2 = fr_stage(lay.gen, 2) if lay.strands() else None
    for strand in lay.strands() or ():
        boot = 0
        for cell in strand:
            nbs = [nb for nb in _neighbors(cell, x2) if nb not in strand]
            if len(nbs) >= 2:
                boot += 1
        if boot == 0:
            raise FillNotAnchorable(
                f"strand {sorted(strand)} has no doubly-anchored cell")
        tree = {frozenset(e) for e in spanning_tree_edges(strand)}
        for j in sorted(lay.positions):
            faces = {}
            edges = {}
            names = {}
            for cell in sorted(strand):
                r = (cell[0] % (lay.w ** 2), cell[1] % (lay.h ** 2))
                names[cell] = nm.tile_strand(j, r)
                for side in (N, E, S, W):
                    nb = (cell[0] + DX[side], cell[1] + DY[side])
                    if nb in strand:
                        if frozenset((cell, nb)) in tree:
                            edges[frozenset((cell, nb))] = (
                                nm.strand_chain(j, cell, nb), 2)
                        continue
                    if nb in x2:
                        faces[(cell, side)] = (nm.strand_relay(j, r, side), 1)
            new = _tiles_from_spec(sorted(strand), faces, edges, names)
            tiles.extend(new)
            for t in new:
                roles[t.name] = ("fill", None, j)

    return ConstructionResult(tiles=tiles, roles=roles, seed_layout=seed_layout,
                              gadget_layout=gadget_layout, key_cover=key_cover,
                              layout=lay)
