"""The hard-coded Sierpinski-carpet tile set.

Eight 32-tile initializer families self-assemble the stage-2 seed
supertiles; eight grout classes of start-gadgets and crawlers wrap a
completed stage-s supertile and expose the glues that let same-class,
same-stage supertiles bind into stage s+1.  Glue strengths for the
stage-binding family and the indicator glues re-emitted by grout follow
the published tables entry for entry.
"""

from __future__ import annotations

from .construction import HAT_AT_KEY, Namer, build_construction
from .core import E, N, S, SIDE_NAMES, TileSet, W
from .errors import ClassOutOfRange, PositionNotIndexed
from .fractal import carpet_generator

# glues assigned strength 0, per grout class (the stage-binding family is
# strength 1 elsewhere)
TABLE1 = {
    1: ("h5", "ĥ7"),
    2: ("h5", "ĥ7"),
    3: ("ĥ4", "ĥ6"),
    4: ("h2", "ĥ3"),
    5: ("h1", "ĥ1*"),
    6: ("h2", "ĥ3"),
    7: ("h2", "ĥ3"),
    8: ("h1", "ĥ1*"),
}

# indicator/boundary glue pairs re-emitted by grout of class j at the four
# side-middle positions p of the next stage
TABLE2 = {
    1: {2: ("ĝn", "gn"), 4: ("ĝw", "gw"), 5: ("ĝ1", "g1"), 7: ("g1", "ĝ1")},
    2: {2: ("ĝn", "gn"), 4: ("ĝ2", "g2"), 5: ("g2", "ĝ2"), 7: ("gs", "ĝs")},
    3: {2: ("ĝn", "gn"), 4: ("ĝ3", "g3"), 5: ("ge", "ĝe"), 7: ("g3", "ĝ3")},
    4: {2: ("ĝ4", "g4"), 4: ("ĝw", "gw"), 5: ("ge", "ĝe"), 7: ("g4", "ĝ4")},
    5: {2: ("ĝ5", "g5"), 4: ("ĝw", "gw"), 5: ("ge", "ĝe"), 7: ("g5", "ĝ5")},
    6: {2: ("ĝ6", "g6"), 4: ("ĝw", "gw"), 5: ("g6", "ĝ6"), 7: ("gs", "ĝs")},
    7: {2: ("ĝn", "gn"), 4: ("ĝ7", "g7"), 5: ("g7", "ĝ7"), 7: ("gs", "ĝs")},
    8: {2: ("ĝ8", "g8"), 4: ("ĝ8", "g8"), 5: ("ge", "ĝe"), 7: ("gs", "ĝs")},
}

INDICATOR_POSITIONS = (2, 4, 5, 7)

# start-gadget designation per position: the side its two anchor glues sit
# on and the key (by flank direction) it occupies; reproduces the published
# strength-0 pattern: suppressing one glue of each bond incident to the
# block beside the designated key forces that block to bind last, exactly
# when the gadget's second anchor appears
SIGMA_PHI = {
    1: (S, E), 2: (E, S), 3: (S, W), 4: (N, E),
    5: (N, W), 6: (E, N), 7: (E, N), 8: (N, W),
}

# bond naming: the eight generator adjacencies, keyed as in the published
# strength table; the two bonds of position 1 are told apart by a star
BOND_SYMBOL = {
    frozenset({1, 2}): "1",
    frozenset({1, 4}): "1*",
    frozenset({2, 3}): "2",
    frozenset({3, 5}): "3",
    frozenset({4, 6}): "4",
    frozenset({5, 8}): "5",
    frozenset({6, 7}): "6",
    frozenset({7, 8}): "7",
}
SYMBOL_BOND = {v: k for k, v in BOND_SYMBOL.items()}


def _parse_h(symbol):
    """('ĥ1*') -> (bond frozenset, hatted)."""
    hat = symbol.startswith("ĥ")
    body = symbol[1:]
    return SYMBOL_BOND[body], hat


KILLS = {j: frozenset(_parse_h(sym) for sym in pair)
         for j, pair in TABLE1.items()}


def grout_class_strengths(j):
    """The stage-binding glues of class j assigned strength zero."""
    if j not in TABLE1:
        raise ClassOutOfRange(f"grout class {j} not in 1..8")
    return set(TABLE1[j])


def indicator_map(j, p):
    """Glue pair re-emitted by class-j grout at next-stage position p."""
    if j not in TABLE2:
        raise ClassOutOfRange(f"grout class {j} not in 1..8")
    if p not in INDICATOR_POSITIONS:
        raise PositionNotIndexed(f"position {p} carries no indicator pair")
    return TABLE2[j][p]


class CarpetNamer(Namer):
    """Published glue vocabulary, namespaced under carpet/."""

    PLAIN = {
        S: {0: "gs", 2: "ĝs"},
        N: {0: "ĝn", 2: "gn"},
        E: {0: "ge", 2: "ĝe"},
        W: {0: "ĝw", 2: "gw"},
    }

    def __init__(self):
        super().__init__("carpet")

    def plain(self, side, residue):
        return f"carpet/g/{self.PLAIN[side][residue]}"

    def indicator(self, i, side, lo):
        hat = HAT_AT_KEY[side][lo]
        return f"carpet/g/{'ĝ' if hat else 'g'}{i}"

    def stage_glue(self, bond, hat, j):
        sym = BOND_SYMBOL[bond]
        return f"carpet/h/{'ĥ' if hat else 'h'}{sym}/{j}"


class CarpetTileSet:
    """TileSet plus role annotations and construction metadata."""

    def __init__(self, tileset: TileSet, roles, construction):
        self.tileset = tileset
        self.roles = roles
        self.construction = construction

    def initializer_names(self, i=None):
        return [n for n, (role, pi, _) in self.roles.items()
                if role == "initializer" and (i is None or pi == i)]

    def seed_supertile(self, i):
        """The canonical completed stage-2 supertile for position i."""
        from .core import canonicalize
        ts = self.tileset
        return canonicalize(
            ((cell, ts.index_of[name])
             for cell, name in self.construction.seed_layout[i]))

    def roles_tsv(self):
        lines = ["tile\trole\tposition\tclass"]
        for t in self.tileset.tiles:
            role, i, j = self.roles[t.name]
            lines.append(f"{t.name}\t{role}\t{'' if i is None else i}"
                         f"\t{'' if j is None else j}")
        return "\n".join(lines) + "\n"


_cached = None


def build_carpet_tileset() -> CarpetTileSet:
    """Temperature-2 carpet tile set: 256 initializers plus grout."""
    global _cached
    if _cached is None:
        gen = carpet_generator()
        res = build_construction(gen, CarpetNamer(),
                                 sigma_phi=SIGMA_PHI, kills=KILLS)
        # the published strength table and the flank geometry must agree on
        # which block binds last per class
        expect_last = {1: 8, 2: 8, 3: 6, 4: 3, 5: 1, 6: 3, 7: 3, 8: 1}
        assert res.layout.last_block == expect_last
        for j, dead in KILLS.items():
            incident = {b for b, _ in dead}
            assert all(expect_last[j] in bond for bond in incident)
        _cached = CarpetTileSet(TileSet(res.tiles, 2), res.roles, res)
    return _cached


def grout_corner_patch_glues():
    """Relay glues that let a stalled grout row resume past a key.

    One per class: the inbound relay of the crawler that covers the ring
    cell under the south lo key while class-j grout wraps a stage-s body of
    identity 1.  Ablating it reproduces the stalled-row scenario.
    """
    cts = build_carpet_tileset()
    out = {}
    for j in range(1, 9):
        out[j] = cts.construction.key_cover[(1, j)][(S, True)]
    return out


def ablate_glues(ts: TileSet, labels) -> TileSet:
    """Copy of a tile set with the given glue labels forced to strength 0."""
    from .core import Glue, NULL_GLUE, TileType
    labels = set(labels)
    tiles = []
    for t in ts.tiles:
        glues = [NULL_GLUE if g.label in labels else g for g in t.glues]
        tiles.append(TileType(t.name, *glues))
    return TileSet(tiles, ts.temperature)
