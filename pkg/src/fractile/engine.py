"""2HAM dynamics: producible-set enumeration, seeded simulation, extension.

The nascent state holds infinitely many copies of every single tile, and a
state transition adds the result of one two-handed combination.  States only
grow, so the set of enabled (pair, offset) events also only grows; that makes
exhaustive closure, uniform random simulation and greedy directed extension
all incremental over one event-discovery core.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .core import (
    DX, DY, OPP, Supertile, TileSet, canonicalize, combination_offsets,
    combine_at, is_stable, singleton,
)
from .errors import (
    FrontierBudgetExceeded, NotProducibleInput, SearchBudgetExceeded,
)

DEFAULT_FRONTIER_BUDGET = 2_000_000


@dataclass
class Event:
    """One enabled combination: state supertiles left + right at an offset."""
    left: int
    right: int
    offset: tuple
    result: int


@dataclass
class AssemblyState:
    """Multiset of distinct tau-stable supertiles (all at multiplicity inf)."""
    supertiles: list
    index_of: dict
    events: list = field(default_factory=list)
    deadlocked: bool = False


class _EventCore:
    """Incremental discovery of combination events among known supertiles.

    Supertiles are interned to dense ids; every unordered pair is examined
    once, when its later member is added.  Candidate partners are pruned by
    a label-level feasibility test: a pair can only reach temperature tau
    when it shares a complementary glue of strength >= tau, shares two
    distinct weaker glues, or shares one weaker glue exposed at two or more
    positions on both sides.  The counting pass skips each supertile's
    single largest partner list, which any two-key partner survives.
    """

    def __init__(self, ts: TileSet, tau: int, stability_check=0.01,
                 rng: random.Random = None):
        self.ts = ts
        self.tau = tau
        self.sts = []
        self.ids = {}
        self.by_strong = {}   # (gid, side) -> ids, glue strength >= tau
        self.by_weak = {}     # (gid, side) -> ids, glue strength < tau
        self.by_weak_multi = {}  # as by_weak, >= 2 exposed positions
        self.stability_check = stability_check
        self.rng = rng or random.Random(0)

    def intern(self, st: Supertile) -> int:
        sid = self.ids.get(st.cells)
        if sid is not None:
            return sid
        sid = len(self.sts)
        self.ids[st.cells] = sid
        self.sts.append(st)
        for key, positions in self.ts.exposure(st).items():
            if self.ts.gid_strength(key[0]) >= self.tau:
                self.by_strong.setdefault(key, []).append(sid)
            else:
                self.by_weak.setdefault(key, []).append(sid)
                if len(positions) >= 2:
                    self.by_weak_multi.setdefault(key, []).append(sid)
        if self.stability_check and self.rng.random() < self.stability_check:
            assert is_stable(self.ts, st, self.tau), \
                "engine invariant violated: unstable supertile interned"
        return sid

    def partners_of(self, sid: int):
        """Candidate partner ids passing the label-level feasibility test."""
        st = self.sts[sid]
        exposure = self.ts.exposure(st)
        seen = set()
        weak_lists = []
        for (gid, side), positions in exposure.items():
            comp = (gid, OPP[side])
            if self.ts.gid_strength(gid) >= self.tau:
                seen.update(self.by_strong.get(comp, ()))
            else:
                weak_lists.append(self.by_weak.get(comp, ()))
                if len(positions) >= 2:
                    seen.update(self.by_weak_multi.get(comp, ()))
        if weak_lists:
            # a partner sharing two distinct weak keys appears in at least
            # one list besides the largest, so the largest can be skipped
            weak_lists.sort(key=len)
            for lst in weak_lists[:-1]:
                seen.update(lst)
        seen.discard(sid)
        seen.add(sid)  # self-pairing (two copies) is always legal to try
        return seen

    def events_between(self, a: int, b: int):
        offs = combination_offsets(self.ts, self.sts[a], self.sts[b], self.tau)
        return [(a, b, off) for off in offs]


def _seed_state(core: _EventCore, ts: TileSet):
    return [core.intern(singleton(ts, ti)) for ti in range(len(ts))]


def enumerate_producible(ts: TileSet, tau: int, max_size: int,
                         budget: int = DEFAULT_FRONTIER_BUDGET,
                         on_event=None):
    """Exactly the producible supertiles of size <= max_size.

    Closure of the singletons under two-handed combination, with results
    larger than max_size discarded (sizes only grow, so nothing reachable
    is missed).  on_event, when given, sees every (left, right, offset,
    result) combination once.
    """
    core = _EventCore(ts, tau)
    pending = list(_seed_state(core, ts))
    done = set()
    while pending:
        sid = pending.pop()
        if sid in done:
            continue
        done.add(sid)
        st = core.sts[sid]
        for other in sorted(core.partners_of(sid)):
            if other not in done:
                continue  # pair handled when the later member is processed
            for a, b, off in core.events_between(sid, other):
                result = combine_at(core.sts[a], core.sts[b], off)
                if result.size > max_size:
                    continue
                rid = core.intern(result)
                if on_event is not None:
                    on_event(core.sts[a], core.sts[b], off, result)
                if rid not in done:
                    pending.append(rid)
                if len(core.sts) > budget:
                    raise FrontierBudgetExceeded(
                        f"more than {budget} distinct supertiles")
    return {core.sts[sid] for sid in done}


def _discover_events(core: _EventCore, state: AssemblyState, sid: int,
                     max_size=None):
    """Append all events pairing `sid` with current state members."""
    for other in sorted(core.partners_of(sid)):
        if other not in state.index_of:
            continue
        for a, b, off in core.events_between(sid, other):
            result = combine_at(core.sts[a], core.sts[b], off)
            if max_size is not None and result.size > max_size:
                continue
            rid = core.intern(result)
            state.events.append(Event(a, b, off, rid))


def _state_add(core: _EventCore, state: AssemblyState, sid: int,
               max_size=None):
    if sid in state.index_of:
        return False
    state.index_of[sid] = len(state.supertiles)
    state.supertiles.append(sid)
    _discover_events(core, state, sid, max_size=max_size)
    return True


def simulate(ts: TileSet, tau: int, seed: int, steps: int):
    """Uniform random combination events from the nascent state.

    Event selection is uniform over all distinct (pair, offset) events
    enabled in the current state; states only ever gain supertiles, so the
    event list is append-only and identical seeds give identical traces.
    Returns (final AssemblyState, trace, core) where trace is a list of
    Event records in execution order.
    """
    rng = random.Random(seed)
    core = _EventCore(ts, tau, rng=random.Random(seed + 1))
    state = AssemblyState(supertiles=[], index_of={})
    for sid in _seed_state(core, ts):
        _state_add(core, state, sid)
    trace = []
    for _step in range(steps):
        if not state.events:
            state.deadlocked = True
            break
        ev = state.events[rng.randrange(len(state.events))]
        trace.append(ev)
        _state_add(core, state, ev.result)
    return state, trace, core


def write_trace(trace, core: _EventCore) -> str:
    """Replayable event log: one line per event plus a supertile table."""
    lines = []
    used = set()
    for n, ev in enumerate(trace):
        dx, dy = ev.offset
        lines.append(f"step {n}: {ev.left} + {ev.right} @ ({dx},{dy})"
                     f" -> {ev.result}")
        used.update((ev.left, ev.right, ev.result))
    for sid in sorted(used):
        st = core.sts[sid]
        body = " ".join(f"{core.ts.tiles[ti].name}@({x},{y})"
                        for x, y, ti in st.cells)
        lines.append(f"supertile {sid} size {st.size}: {body}")
    return "\n".join(lines) + "\n"


def replay_trace(ts: TileSet, tau: int, trace, core: _EventCore):
    """Check every recorded event against the combination operation."""
    from .core import combinations
    for ev in trace:
        left, right = core.sts[ev.left], core.sts[ev.right]
        expect = core.sts[ev.result]
        got = combinations(ts, left, right, tau, check_stable=False)
        if (ev.offset, expect) not in got:
            return False
    return True


class Assembly:
    """A growing positioned assembly with an incremental exposure index."""

    def __init__(self, ts: TileSet, st: Supertile):
        self.ts = ts
        self.cells = {}
        self.exposure = {}   # (gid, side) -> set of positions
        self.size = 0
        self._merge_cells({(x, y): ti for x, y, ti in st.cells})

    def _merge_cells(self, placed):
        ts = self.ts
        for (x, y), ti in placed.items():
            self.cells[(x, y)] = ti
        for (x, y), ti in placed.items():
            gids = ts.tile_gids[ti]
            for side in range(4):
                nb = (x + DX[side], y + DY[side])
                if nb in self.cells:
                    # covered faces are no longer exposed
                    oti = self.cells[nb]
                    ogid = ts.tile_gids[oti][OPP[side]]
                    if ogid and nb not in placed:
                        ex = self.exposure.get((ogid, OPP[side]))
                        if ex:
                            ex.discard(nb)
                    continue
                gid = gids[side]
                if gid:
                    self.exposure.setdefault((gid, side), set()).add((x, y))
        self.size = len(self.cells)

    def attach_options(self, st: Supertile, tau: int):
        """Offsets where supertile st binds to this assembly."""
        ts = self.ts
        cand = {}
        for (gid, side), positions in ts.exposure(st).items():
            anchors = self.exposure.get((gid, OPP[side]))
            if not anchors:
                continue
            s = ts.gid_strength(gid)
            dx0, dy0 = DX[OPP[side]], DY[OPP[side]]
            for ax, ay in anchors:
                tx, ty = ax + dx0, ay + dy0
                for qx, qy in positions:
                    off = (tx - qx, ty - qy)
                    cand[off] = cand.get(off, 0) + s
        out = []
        for off, strength in cand.items():
            if strength < tau:
                continue
            dx, dy = off
            if any((x + dx, y + dy) in self.cells for x, y, _ in st.cells):
                continue
            out.append(off)
        return out

    def attach(self, st: Supertile, offset):
        dx, dy = offset
        self._merge_cells({(x + dx, y + dy): ti for x, y, ti in st.cells})

    def shape(self):
        return frozenset(self.cells)

    def to_supertile(self) -> Supertile:
        return canonicalize(((xy, ti) for xy, ti in self.cells.items()))


class _Grower:
    """Event-driven greedy attachment of pool helpers to an Assembly.

    Each newly exposed glue face enqueues the pool helpers carrying the
    complementary glue; an attachment is taken as soon as the full
    interface strength at the implied offset reaches tau.  `salt` rotates
    the preference order among competing helpers so that repeated spawns
    explore different nondeterministic branches (different grout classes).
    """

    def __init__(self, ts: TileSet, tau: int, asm: Assembly, pool_index,
                 salt: int = 0):
        self.ts = ts
        self.tau = tau
        self.asm = asm
        self.pool_index = pool_index
        self.salt = salt
        self.cached_st = None
        self.queue = []
        for (gid, side), positions in asm.exposure.items():
            for p in positions:
                self.queue.append((p, gid, side))

    def supertile(self):
        if self.cached_st is None:
            self.cached_st = self.asm.to_supertile()
        return self.cached_st

    def _interface(self, st: Supertile, off):
        ts, cells = self.ts, self.asm.cells
        dx, dy = off
        total = 0
        for x, y, ti in st.cells:
            gids = ts.tile_gids[ti]
            px, py = x + dx, y + dy
            if (px, py) in cells:
                return -1  # overlap
            for side in range(4):
                oti = cells.get((px + DX[side], py + DY[side]))
                if oti is None:
                    continue
                g1 = gids[side]
                if g1 and g1 == ts.tile_gids[oti][OPP[side]]:
                    total += ts.gid_strength(g1)
        return total

    def attach_some(self):
        """Attach one helper if possible; returns the supertile or None."""
        while self.queue:
            p, gid, side = self.queue.pop()
            if p not in self.asm.exposure.get((gid, side), ()):
                continue
            cands = self.pool_index.get((gid, OPP[side]), ())
            if not cands:
                continue
            k = self.salt % len(cands)
            for st, qpos in cands[k:] + cands[:k]:
                tx, ty = p[0] + DX[side], p[1] + DY[side]
                for qx, qy in qpos:
                    off = (tx - qx, ty - qy)
                    if self._interface(st, off) >= self.tau:
                        old = {k2: set(v) for k2, v in self.asm.exposure.items()}
                        self.asm.attach(st, off)
                        self.cached_st = None
                        for key, positions in self.asm.exposure.items():
                            fresh = positions - old.get(key, set())
                            for np_ in fresh:
                                self.queue.append((np_, key[0], key[1]))
                        # the consumed anchor may still pair elsewhere
                        self.queue.append((p, gid, side))
                        return st
        return None

    def requeue_all(self):
        for (gid, side), positions in self.asm.exposure.items():
            for p in positions:
                self.queue.append((p, gid, side))


def _pool_index(ts: TileSet, pool):
    index = {}
    for st in pool:
        for key, positions in ts.exposure(st).items():
            index.setdefault(key, []).append((st, positions))
    # order by size then leading tile name so that equivalent alternatives
    # (e.g. the eight grout classes) line up identically for every identity
    for key in index:
        index[key].sort(key=lambda item: (-item[0].size,
                                          ts.tiles[item[0].cells[0][2]].name,
                                          item[0].cells))
    return index


def extend_to_target(ts: TileSet, tau: int, start: Supertile, target_size: int,
                     pool=None, pool_cap: int = 40,
                     budget: int = 500_000, stop=None):
    """Directed growth from `start` to a supertile of size >= target_size.

    pool: reusable producible helpers (defaults to the full enumeration up
    to pool_cap).  Growth is greedy and completion-biased: the main
    assembly attaches helpers as soon as a cooperative site appears; when
    it stalls, sibling assemblies are spawned from the largest helpers,
    grown the same way, and merged back once a binding site exists.  stop,
    when given, may end the search early by returning True for the main
    assembly.  Returns (Assembly, attachment log).
    """
    if pool is None:
        pool = enumerate_producible(ts, tau, pool_cap)
    pool = sorted(pool, key=lambda st: (-st.size, st.cells))
    if not pool:
        raise NotProducibleInput("empty helper pool")
    if not is_stable(ts, start, tau):
        raise NotProducibleInput("start supertile is not tau-stable")
    if start.size <= max(p.size for p in pool) and start not in set(pool):
        raise NotProducibleInput("start supertile is not producible")
    index = _pool_index(ts, pool)

    main_g = _Grower(ts, tau, Assembly(ts, start), index)
    main = main_g.asm
    growers = [main_g]
    seq = []
    spent = 0
    top_size = pool[0].size
    spawn_seeds = [st for st in pool if st.size == top_size]
    spawned = 0
    while main.size < target_size and not (stop and stop(main)):
        spent += 1
        if spent > budget:
            raise SearchBudgetExceeded(f"extension budget {budget} spent")
        progressed = False
        for g in growers:
            st = g.attach_some()
            if st is not None:
                seq.append(("attach", g.asm.size))
                progressed = True
                break
        if progressed:
            continue
        # everything stalled: merge sub-assemblies, preferring the main
        merged = False
        others = sorted((g for g in growers if g is not main_g),
                        key=lambda g: (-g.asm.size, g.salt))
        for target in [main_g] + others:
            for source in sorted(others, key=lambda g: (g.asm.size, g.salt)):
                if source is target or source.asm.size > target.asm.size:
                    continue
                st = source.supertile()
                opts = target.asm.attach_options(st, tau)
                if opts:
                    target.asm.attach(st, min(opts))
                    target.cached_st = None
                    target.requeue_all()
                    growers.remove(source)
                    seq.append(("merge", st.size))
                    merged = True
                    break
            if merged:
                break
        if merged:
            continue
        # discard hopeless duplicates once the roster is full
        if len(growers) > 40:
            victim = min((g for g in growers if g is not main_g),
                         key=lambda g: (g.asm.size, -g.salt))
            growers.remove(victim)
            seq.append(("discard", victim.asm.size))
        seed = spawn_seeds[spawned % len(spawn_seeds)]
        salt = spawned // len(spawn_seeds)
        growers.append(_Grower(ts, tau, Assembly(ts, seed), index, salt=salt))
        seq.append(("spawn", seed.size))
        spawned += 1
    return main, seq


def is_terminal_within(ts: TileSet, st: Supertile, universe, tau: int) -> bool:
    """No member of the enumerated universe combines with st.

    A bound-relative approximation of terminality: exact only if the
    universe really contains every producible partner.
    """
    for other in universe:
        if combination_offsets(ts, st, other, tau):
            return False
    return True
