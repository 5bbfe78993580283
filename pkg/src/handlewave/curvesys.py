"""Multi-curves on the genus-2 surface in normal position with respect to {D_A, D_B}.

Cutting the surface along the two disk boundaries leaves a four-holed sphere
F0 whose boundary circles are A+, A-, B+, B-.  A curve system is a set of
disjoint essential arcs ("edges") in F0: each circle carries ``n`` slots,
numbered in the boundary orientation induced from F0, and each slot is the end
of exactly one edge.  The handle gluing identifies slot ``i`` of X+ with slot
``(t_X - i) mod n`` of X-, which reverses the induced orientations.

A curve leaving F0 through X- and re-entering through X+ crosses D_X in the
positive direction and reads the letter X; the other way round it reads x.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

from .freegroup import CyclicWord, cyclic_reduce, exponent_sums

CIRCLES = ("A+", "A-", "B+", "B-")
PARTNER = {"A+": "A-", "A-": "A+", "B+": "B-", "B-": "B+"}
EXIT_LETTER = {"A-": "A", "A+": "a", "B-": "B", "B+": "b"}
SCHEMA = "handlewave.diagram/1"


class InvalidSystem(ValueError):
    def __init__(self, diagnostics):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = list(diagnostics)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    where: tuple = ()
    level: str = "error"

    def __str__(self):
        return f"{self.code}: {self.message}"

    def as_dict(self):
        return {"level": self.level, "code": self.code, "message": self.message,
                "where": [list(w) if isinstance(w, tuple) else w for w in self.where]}


Slot = tuple  # (circle, index)


@dataclass(frozen=True)
class Crossing:
    """One passage of a curve through a cutting disk."""

    curve: str
    position: int  # index along the curve's crossing sequence
    letter: str
    exit_slot: Slot
    entry_slot: Slot

    @property
    def disk(self) -> str:
        return self.letter.upper()

    @property
    def sign(self) -> int:
        return 1 if self.letter.isupper() else -1


@dataclass(frozen=True)
class Traversal:
    """A closed curve read off the fat graph, starting at its selector edge."""

    name: str
    edges: tuple  # (edge index, reversed?) in order
    crossings: tuple  # Crossing after each edge

    @property
    def raw_word(self) -> str:
        return "".join(c.letter for c in self.crossings)


@dataclass(frozen=True)
class CurveSystem:
    sizes: dict
    edges: tuple
    twists: dict = field(default_factory=lambda: {"A": 0, "B": 0})
    curves: dict = field(default_factory=dict)  # name -> selector edge index

    def __post_init__(self):
        object.__setattr__(self, "sizes", {c: int(self.sizes.get(c, 0)) for c in CIRCLES})
        object.__setattr__(self, "edges", tuple((tuple(a), tuple(b)) for a, b in self.edges))
        object.__setattr__(self, "twists", {"A": int(self.twists.get("A", 0)), "B": int(self.twists.get("B", 0))})
        object.__setattr__(self, "curves", dict(self.curves))

    def __hash__(self):
        return hash((tuple(self.sizes.items()), self.edges, tuple(self.twists.items()),
                     tuple(sorted(self.curves.items()))))

    # -- slot bookkeeping ------------------------------------------------------

    @cached_property
    def slot_edge(self) -> dict:
        table = {}
        for k, (p, q) in enumerate(self.edges):
            table.setdefault(p, []).append(k)
            table.setdefault(q, []).append(k)
        return table

    def edge_at(self, slot: Slot) -> int:
        return self.slot_edge[slot][0]

    def other_end(self, k: int, slot: Slot) -> Slot:
        p, q = self.edges[k]
        return q if slot == p else p

    def glue(self, slot: Slot) -> Slot:
        c, i = slot
        n = self.sizes[c]
        return (PARTNER[c], (self.twists[c[0]] - i) % n)

    def next_slot(self, slot: Slot, step: int = 1) -> Slot:
        c, i = slot
        return (c, (i + step) % self.sizes[c])

    # -- structure ---------------------------------------------------------------

    def diagnostics(self) -> list[Diagnostic]:
        return validate(self)

    @property
    def is_valid(self) -> bool:
        return not [d for d in validate(self) if d.level == "error"]

    def require_valid(self):
        errs = [d for d in validate(self) if d.level == "error"]
        if errs:
            raise InvalidSystem(errs)

    @cached_property
    def _components(self) -> list[Traversal]:
        seen = set()
        out = []
        named = {k: name for name, k in self.curves.items()}
        order = sorted(named) + [k for k in range(len(self.edges)) if k not in named]
        anon = 0
        for k in order:
            if k in seen:
                continue
            if k in named:
                name = named[k]
            else:
                name = f"_c{anon}"
                anon += 1
            tr = _trace(self, k, name)
            seen.update(e for e, _ in tr.edges)
            out.append(tr)
        return out

    def traversals(self) -> dict[str, Traversal]:
        return {t.name: t for t in self._components}

    def traversal(self, name: str) -> Traversal:
        try:
            return self.traversals()[name]
        except KeyError:
            raise KeyError(f"no curve named {name!r}") from None

    def curve_of_edge(self) -> dict[int, str]:
        return {e: t.name for t in self._components for e, _ in t.edges}

    def slot_owner(self) -> dict:
        owner = self.curve_of_edge()
        return {s: owner[ks[0]] for s, ks in self.slot_edge.items()}

    def crossings(self, name: str) -> tuple:
        return self.traversal(name).crossings

    def names(self) -> list[str]:
        return [t.name for t in self._components]

    def restrict(self, keep) -> CurveSystem:
        """Subsystem made of the named curves in ``keep``."""
        keep = set(keep)
        owner = self.curve_of_edge()
        kept = [k for k in range(len(self.edges)) if owner[k] in keep]
        return _reindex(self, kept, {n: k for n, k in self.curves.items() if n in keep})

    def replace_twists(self, **twists) -> CurveSystem:
        tw = dict(self.twists)
        tw.update(twists)
        return CurveSystem(self.sizes, self.edges, tw, self.curves)

    # -- serialization -------------------------------------------------------------

    def to_dict(self) -> dict:
        owner = self.slot_owner() if self.edges else {}
        return {
            "schema": SCHEMA,
            "cut": {"sizes": dict(self.sizes), "twists": dict(self.twists)},
            "chords": _compress(self),
            "slot_orders": {c: [owner[(c, i)] for i in range(self.sizes[c])] for c in CIRCLES},
            "curves": {name: {"edge": list(map(list, self.edges[k]))} for name, k in sorted(self.curves.items())},
        }

    def to_json(self) -> str:
        return json.dumps(canonical(self).to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> CurveSystem:
        if data.get("schema") != SCHEMA:
            raise ValueError(f"unsupported diagram schema {data.get('schema')!r}")
        cut = data["cut"]
        sizes = {c: int(cut["sizes"].get(c, 0)) for c in CIRCLES}
        probe = cls(sizes, [], cut.get("twists", {}))
        edges = []
        for ch in data["chords"]:
            first = tuple(tuple(x) for x in ch["class"])
            edges.extend(_shift(probe, first, r) for r in range(int(ch["count"])))
        where = {frozenset(e): k for k, e in enumerate(edges)}
        curves = {}
        for name, sel in data.get("curves", {}).items():
            e = tuple(tuple(x) for x in sel["edge"])
            k = where[frozenset(e)]
            edges[k] = e
            curves[name] = k
        sys = cls(sizes, edges, cut.get("twists", {}), curves)
        orders = data.get("slot_orders")
        if orders is not None and sys.is_valid:
            mine = sys.to_dict()["slot_orders"]
            if any(list(orders.get(c, [])) != mine[c] for c in CIRCLES):
                raise ValueError("slot_orders disagree with the chords")
        return sys

    @classmethod
    def from_json(cls, text: str) -> CurveSystem:
        return cls.from_dict(json.loads(text))


def _trace(sys: CurveSystem, k: int, name: str) -> Traversal:
    start = k
    p, q = sys.edges[k]
    edges, crossings = [], []
    cur, frm = k, p
    pos = 0
    guard = 2 * len(sys.edges) + 2
    while True:
        to = sys.other_end(cur, frm)
        edges.append((cur, sys.edges[cur][0] != frm))
        entry = sys.glue(to)
        crossings.append(Crossing(name, pos, EXIT_LETTER[to[0]], to, entry))
        pos += 1
        nxt = sys.edge_at(entry)
        if nxt == start and entry == p:
            break
        cur, frm = nxt, entry
        if pos > guard:
            raise InvalidSystem([Diagnostic("trace", f"curve {name} does not close up")])
    return Traversal(name, tuple(edges), tuple(crossings))


def _reindex(sys: CurveSystem, kept: list[int], curves: dict) -> CurveSystem:
    used = {c: sorted(i for k in kept for (cc, i) in sys.edges[k] if cc == c) for c in CIRCLES}
    new_index = {c: {i: j for j, i in enumerate(used[c])} for c in CIRCLES}
    twists = {}
    for X in "AB":
        plus = used[X + "+"]
        if plus:
            i0 = plus[0]
            _, j0 = sys.glue((X + "+", i0))
            twists[X] = (new_index[X + "+"][i0] + new_index[X + "-"][j0]) % len(plus)
        else:
            twists[X] = 0
    edges = [tuple((c, new_index[c][i]) for c, i in sys.edges[k]) for k in kept]
    kmap = {k: j for j, k in enumerate(kept)}
    return CurveSystem({c: len(used[c]) for c in CIRCLES}, edges, twists,
                       {n: kmap[k] for n, k in curves.items()})


def _slot_key(s):
    return (CIRCLES.index(s[0]), s[1])


def _norm_edge(e):
    return tuple(sorted(e, key=_slot_key))


def _shift(sys, e, r):
    (c1, i1), (c2, i2) = e
    return ((c1, (i1 + r) % sys.sizes[c1]), (c2, (i2 - r) % sys.sizes[c2]))


def _compress(sys: CurveSystem) -> list[dict]:
    """Group edges into runs of parallel chords: (c1,i+r)-(c2,j-r) for r < count."""
    remaining = {_norm_edge(e) for e in sys.edges}
    out = []
    for e in sorted(remaining, key=lambda e: (_slot_key(e[0]), _slot_key(e[1]))):
        if e not in remaining:
            continue
        start = e
        for _ in range(len(remaining)):
            p = _shift(sys, start, -1)
            if p == e or p != _norm_edge(p) or p not in remaining:
                break
            start = p
        count = 0
        cur = start
        while cur in remaining and cur == _norm_edge(cur):
            remaining.discard(cur)
            count += 1
            cur = _shift(sys, start, count)
        out.append({"class": [list(start[0]), list(start[1])], "count": count})
    out.sort(key=lambda ch: (ch["class"], ch["count"]))
    return out


def canonical(sys: CurveSystem) -> CurveSystem:
    """Orient every unnamed edge from its smaller slot; named selectors keep direction."""
    selected = set(sys.curves.values())
    edges = []
    for k, (p, q) in enumerate(sys.edges):
        if k in selected:
            edges.append((p, q))
        else:
            edges.append(tuple(sorted((p, q), key=lambda s: (CIRCLES.index(s[0]), s[1]))))
    return CurveSystem(sys.sizes, edges, sys.twists, sys.curves)


# -- validation --------------------------------------------------------------------

def ribbon_faces(sys: CurveSystem) -> list[list[Slot]]:
    """Faces of F0 cut along the edges, as cycles of darts.

    A dart is a slot ``s``; the face to the left of the circle interval from
    ``s`` to the next slot continues along the edge at that next slot.
    """
    seen = set()
    faces = []
    for s in sorted(sys.slot_edge, key=lambda s: (CIRCLES.index(s[0]), s[1])):
        if s in seen:
            continue
        face = []
        cur = s
        while cur not in seen:
            seen.add(cur)
            face.append(cur)
            nxt = sys.next_slot(cur)
            cur = sys.other_end(sys.edge_at(nxt), nxt)
        faces.append(face)
    return faces


def graph_components(sys: CurveSystem) -> list[set]:
    parent = {c: c for c in CIRCLES if sys.sizes[c]}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p, q in sys.edges:
        parent[find(p[0])] = find(q[0])
    groups = {}
    for c in parent:
        groups.setdefault(find(c), set()).add(c)
    return list(groups.values())


def validate(sys: CurveSystem) -> list[Diagnostic]:
    out = []
    for X in "AB":
        if sys.sizes[X + "+"] != sys.sizes[X + "-"]:
            out.append(Diagnostic("handle", f"|{X}+| = {sys.sizes[X + '+']} but |{X}-| = {sys.sizes[X + '-']}",
                                  (X + "+", X + "-")))
    for k, (p, q) in enumerate(sys.edges):
        for c, i in (p, q):
            if c not in CIRCLES or not 0 <= i < sys.sizes.get(c, 0):
                out.append(Diagnostic("slot", f"edge {k} uses missing slot {(c, i)}", ((c, i),)))
        if p == q:
            out.append(Diagnostic("slot", f"edge {k} is a loop at one slot", (p,)))
    if out:
        return out
    for c in CIRCLES:
        for i in range(sys.sizes[c]):
            users = sys.slot_edge.get((c, i), [])
            if len(users) != 1:
                out.append(Diagnostic("slot", f"slot {(c, i)} is used by {len(users)} edges", ((c, i),)))
    if out:
        return out
    faces = ribbon_faces(sys)
    comps = graph_components(sys)
    v = sum(len(g) for g in comps)
    euler = v - len(sys.edges) + len(faces)
    if euler != 2 * len(comps):
        crossing = _crossing_pairs(sys)
        out.append(Diagnostic("noncrossing", f"edges cross (euler {euler}, expected {2 * len(comps)})",
                              tuple(crossing[:4])))
    elif len(comps) == 1 and sum(1 for c in CIRCLES if sys.sizes[c]) == 4:
        for f in faces:
            if len(f) == 1:
                k = sys.edge_at(sys.next_slot(f[0]))
                out.append(Diagnostic("normal", f"edge {k} is parallel into circle {f[0][0]}", (k,)))
    elif len(comps) > 1:
        out.append(Diagnostic("placement", "fat graph is disconnected; face placement of components is not recorded",
                              level="warning"))
    if out:
        return out
    try:
        comps = sys._components
    except InvalidSystem as exc:
        return exc.diagnostics
    names = [t.name for t in comps]
    if len(set(sys.curves.values())) != len(sys.curves):
        out.append(Diagnostic("curves", "two curve ids select the same edge"))
    trace_of = {e: t.name for t in comps for e, _ in t.edges}
    for name, k in sys.curves.items():
        if trace_of.get(k) != name:
            out.append(Diagnostic("curves", f"curve ids {name!r} and {trace_of.get(k)!r} select one component"))
    for n in names:
        if n.startswith("_c") and sys.curves:
            out.append(Diagnostic("curves", f"component {n} carries no curve id", level="warning"))
    for t in comps:
        raw = t.raw_word
        if cyclic_reduce(raw) != raw:
            out.append(Diagnostic("reduced", f"curve {t.name} reads {raw}, which is not cyclically reduced",
                                  (t.name,), level="warning"))
    return out


def _crossing_pairs(sys: CurveSystem) -> list:
    """Pairs of edges meeting a common circle with interleaved ends (evidence only)."""
    pairs = []
    for a in range(len(sys.edges)):
        for b in range(a + 1, len(sys.edges)):
            (p1, q1), (p2, q2) = sys.edges[a], sys.edges[b]
            if p1[0] == q1[0] == p2[0] == q2[0]:
                n = sys.sizes[p1[0]]
                x, y = sorted((p1[1], q1[1]))
                inside = [x < i < y for i in (p2[1], q2[1])]
                if inside[0] != inside[1]:
                    pairs.append((a, b))
    return pairs


# -- words ------------------------------------------------------------------------

def extract_words(sys: CurveSystem) -> dict[str, CyclicWord]:
    sys.require_valid()
    return {t.name: CyclicWord.of(t.raw_word) for t in sys._components}


def strand_counts(sys: CurveSystem, curve: str) -> dict:
    """Strands of one curve per handle and per edge class (circle pair)."""
    tr = sys.traversal(curve) if sys.edges else None
    out = {"handle_A": 0, "handle_B": 0, "edges": {}}
    if tr is None:
        return out
    for c in tr.crossings:
        out["handle_" + c.disk] += 1
    for k, _ in tr.edges:
        p, q = sys.edges[k]
        key = "".join(sorted((p[0], q[0]), key=CIRCLES.index))
        out["edges"][key] = out["edges"].get(key, 0) + 1
    ra = tr.raw_word
    out["AA"] = sum(1 for i in range(len(ra)) if ra[i].upper() == "A" and ra[i] == ra[(i + 1) % len(ra)])
    out["BB"] = sum(1 for i in range(len(ra)) if ra[i].upper() == "B" and ra[i] == ra[(i + 1) % len(ra)])
    return out


def homology_of(sys: CurveSystem, curve: str) -> tuple[int, int]:
    return exponent_sums(sys.traversal(curve).raw_word)


# -- arcs, faces and surgery --------------------------------------------------------

@dataclass(frozen=True)
class ArcRoute:
    """An arc in F0 from one edge of a base curve to another.

    ``ends`` are (edge index, along) pairs: the arc leaves the first edge and
    arrives at the second from the face that traverses each edge along the
    base curve's orientation (``along``) or against it.  ``crossed`` lists the
    other edges met on the way, with the sign of each crossing.
    """

    ends: tuple
    faces: tuple = ()
    crossed: tuple = ()

    @property
    def length(self) -> int:
        return len(self.crossed)


@dataclass(frozen=True)
class SurgeryResult:
    components: tuple  # (name, CyclicWord, CurveSystem)
    wave_traversals: dict
    reductions: dict  # name -> letters cancelled while tightening

    def words(self) -> dict:
        return {name: w for name, w, _ in self.components}


class FaceMap:
    """Faces of F0 cut along every edge of a system, with edge sides."""

    def __init__(self, sys: CurveSystem):
        self.sys = sys
        self.faces = ribbon_faces(sys)
        self.face_of = {s: f for f, darts in enumerate(self.faces) for s in darts}

    def side(self, k: int, start: Slot) -> int:
        """Face that runs along edge ``k`` starting from its end ``start``."""
        return self.face_of[self.sys.next_slot(start, -1)]

    def neighbours(self, f: int, walls: set):
        for s in self.faces[f]:
            nxt = self.sys.next_slot(s)
            k = self.sys.edge_at(nxt)
            if k in walls:
                continue
            other = self.sys.other_end(k, nxt)
            yield k, nxt, self.side(k, other)


def oriented_ends(sys: CurveSystem, curve: str) -> dict:
    """Edge index -> (start, end) slots in the direction the curve runs."""
    out = {}
    for k, rev in sys.traversal(curve).edges:
        p, q = sys.edges[k]
        out[k] = (q, p) if rev else (p, q)
    return out


def _drop_slots(sys: CurveSystem, edges: list, curves: dict, gone: set) -> CurveSystem:
    keep = {c: [i for i in range(sys.sizes[c]) if (c, i) not in gone] for c in CIRCLES}
    new_index = {c: {i: j for j, i in enumerate(keep[c])} for c in CIRCLES}
    twists = {}
    for X in "AB":
        plus = keep[X + "+"]
        if plus:
            i0 = plus[0]
            _, j0 = sys.glue((X + "+", i0))
            twists[X] = (new_index[X + "+"][i0] + new_index[X + "-"][j0]) % len(plus)
        else:
            twists[X] = 0
    moved = [tuple((c, new_index[c][i]) for c, i in e) for e in edges]
    return CurveSystem({c: len(keep[c]) for c in CIRCLES}, moved, twists, curves)


def tighten(sys: CurveSystem) -> tuple[CurveSystem, int]:
    """Remove edges parallel into a circle by pushing them through the disk.

    Only applied when the system meets all four circles in one connected fat
    graph, where a one-edge face is certainly an empty monogon.  Returns the
    new system and the number of cancelled letter pairs.
    """
    cancelled = 0
    while True:
        if not sys.edges or any(sys.sizes[c] == 0 for c in CIRCLES) or len(graph_components(sys)) != 1:
            return sys, cancelled
        mono = [f[0] for f in ribbon_faces(sys) if len(f) == 1]
        if not mono:
            return sys, cancelled
        s = mono[0]
        s2 = sys.next_slot(s)
        e = sys.edge_at(s2)
        g1, g2 = sys.glue(s), sys.glue(s2)
        f1, f2 = sys.edge_at(g1), sys.edge_at(g2)
        if f1 == f2:
            return sys, cancelled
        u1, u2 = sys.other_end(f1, g1), sys.other_end(f2, g2)
        curve = sys.curve_of_edge()[e]
        ends = oriented_ends(sys, curve)
        new_edge = (u1, u2) if ends[f1] == (u1, g1) else (u2, u1)
        removed = (e, f1, f2)
        kept = [k for k in range(len(sys.edges)) if k not in removed]
        edges = [sys.edges[k] for k in kept] + [new_edge]
        where = {k: j for j, k in enumerate(kept)}
        curves = {n: where.get(k, len(edges) - 1) for n, k in sys.curves.items()}
        sys = _drop_slots(sys, edges, curves, {s, s2, g1, g2})
        cancelled += 1


def band_surgery(sys: CurveSystem, R: str, route: ArcRoute, names=("m1", "m2")) -> SurgeryResult:
    """Surger ``R`` along an arc meeting it from one side at both ends."""
    (e1, along1), (e2, along2) = route.ends
    if along1 != along2:
        raise ValueError("arc meets the curve from opposite sides: not a wave")
    if e1 == e2:
        raise ValueError("arc must join two different edges")
    ends = oriented_ends(sys, R)
    if e1 not in ends or e2 not in ends:
        raise ValueError(f"arc ends are not on {R}")
    (p1, q1), (p2, q2) = ends[e1], ends[e2]
    base = [ends[k] for k in ends if k not in (e1, e2)]
    edges = base + [(p2, q1), (p1, q2)]
    used = {s for e in edges for s in e}
    gone = {(c, i) for c in CIRCLES for i in range(sys.sizes[c])} - used
    swapped = _drop_slots(sys, edges, {names[0]: len(edges) - 2, names[1]: len(edges) - 1}, gone)
    if len({swapped.curve_of_edge()[k] for k in (len(edges) - 2, len(edges) - 1)}) != 2:
        raise ValueError("surgery produced a single curve: arc is not a wave")
    comps, reductions = [], {}
    for name in names:
        alone = swapped.restrict([name])
        raw = alone.traversal(name).raw_word
        tight, cancelled = tighten(alone)
        word = CyclicWord.of(cyclic_reduce(raw))
        if cancelled and tight.edges:
            if CyclicWord.of(tight.traversal(name).raw_word) != word:
                raise InvalidSystem([Diagnostic("tighten", f"tightening {name} changed its word")])
        reductions[name] = (len(raw) - len(word.letters)) // 2
        comps.append((name, word, tight if cancelled else alone))
    return SurgeryResult(tuple(comps), {n: 1 for n in names}, reductions)


def minimal_intersection(sys: CurveSystem, arc: ArcRoute, target: str, signed: bool = False) -> int:
    """Crossings of a routed arc with the named curve.

    Routes are shortest paths through the faces of F0, so crossing counts are
    minimal within each face sequence; builders keep the faces disks.
    """
    owner = sys.curve_of_edge()
    hits = [s for k, s in arc.crossed if owner[k] == target]
    return sum(hits) if signed else len(hits)
