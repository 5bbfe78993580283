"""Curve systems drawn on two flat punctured tori glued along a separating curve.

The genus-2 surface is T_A ∪_Σ T_B.  In each torus R^2/Z^2 the puncture sits
at the origin, the meridian disk boundary is the vertical circle x = 1/2, and
an arc class is a primitive vector v: the straight arc from the puncture to
its translate by v.  Parallel copies are pushed off to the left of the
direction of travel.  Arcs of one torus are glued to arcs of the other along
Σ by an order-reversing matching of their ends, shifted by a twist.

Everything is compared exactly (integers over a common denominator plus an
infinitesimal offset), so the resulting fat graph is combinatorially exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import atan2, gcd, lcm

from .curvesys import CurveSystem, Diagnostic, InvalidSystem


@dataclass(frozen=True)
class ArcClass:
    """``weight`` parallel arcs of slope ``vector``; ``tags[j]`` names copy j.

    Copies are numbered from right to left as seen travelling along the vector.
    """

    vector: tuple
    weight: int = 1
    tag: str = "c"
    tags: tuple = ()

    def __post_init__(self):
        n, m = self.vector
        if gcd(n, m) != 1:
            raise ValueError(f"arc class {self.vector} is not primitive")
        if self.weight < 1:
            raise ValueError("weight must be positive")
        if self.tags and len(self.tags) != self.weight:
            raise ValueError("need one tag per copy")

    def tag_of(self, j: int) -> str:
        return self.tags[j] if self.tags else self.tag

    @classmethod
    def mixed(cls, vector, tags) -> ArcClass:
        tags = tuple(tags)
        return cls(tuple(vector), len(tags), tags[0], tags if len(set(tags)) > 1 else ())


@dataclass(frozen=True)
class _Strand:
    side: str  # "A" or "B"
    cls: int
    copy: int
    tag: str
    crossings: tuple  # (key, direction) along the arc from its start


def _angle(v):
    return atan2(v[1], v[0])


def _strands(side: str, classes) -> list[_Strand]:
    # heights on the disk circle as integers over the common denominator L
    L = 2 * lcm(*[abs(c.vector[0]) for c in classes if c.vector[0]] or [1])
    out = []
    for ci, c in enumerate(classes):
        n, m = c.vector
        for j in range(c.weight):
            pts = []
            for k in range(abs(n)):
                y = (m * (2 * k + 1) * (L // (2 * abs(n)))) % L
                tie = j if n > 0 else -j
                pts.append(((y, tie, ci), 1 if n > 0 else -1))
            out.append(_Strand(side, ci, j, c.tag_of(j), tuple(pts)))
    return out


def _ends(classes) -> list[tuple]:
    """Ends of all arcs around the puncture, counterclockwise: (class, copy, is_start)."""
    return list(_ends_of(tuple(classes)))


@lru_cache(maxsize=4096)
def _ends_of(classes: tuple) -> tuple:
    ends = []
    for ci, c in enumerate(classes):
        v = c.vector
        w = (-v[0], -v[1])
        for j in range(c.weight):
            ends.append(((_angle(v), j), (ci, j, True)))
            ends.append(((_angle(w), -j), (ci, j, False)))
    ends.sort(key=lambda e: e[0])
    return tuple(e[1] for e in ends)


def end_count(classes) -> int:
    return 2 * sum(c.weight for c in classes)


def build(classes_a, classes_b, twist: int, names=None) -> CurveSystem:
    """Glue the arc systems of the two tori and return the F0 fat graph.

    ``names`` maps a tag to the base curve id; by default the tag itself.  A
    tag spread over several components yields ids ``tag``, ``tag.1``, ...
    """
    classes_a, classes_b = list(classes_a), list(classes_b)
    ends_a, ends_b = _ends(classes_a), _ends(classes_b)
    if len(ends_a) != len(ends_b):
        raise InvalidSystem([Diagnostic("sigma", f"{len(ends_a)} arc ends in T_A but {len(ends_b)} in T_B")])
    N = len(ends_a)
    strands = {"A": _strands("A", classes_a), "B": _strands("B", classes_b)}
    index = {"A": {}, "B": {}}
    for side in "AB":
        k = 0
        for ci, c in enumerate(classes_a if side == "A" else classes_b):
            for j in range(c.weight):
                index[side][(ci, j)] = strands[side][k]
                k += 1
    pos_a = {e: i for i, e in enumerate(ends_a)}
    pos_b = {e: i for i, e in enumerate(ends_b)}

    def across(side, end):
        if side == "A":
            return "B", ends_b[(twist - pos_a[end]) % N]
        return "A", ends_a[(twist - pos_b[end]) % N]

    # ranks of crossing points on each meridian circle
    rank = {}
    for side in "AB":
        keys = sorted(k for s in strands[side] for k, _ in s.crossings)
        rank[side] = {k: r for r, k in enumerate(keys)}
    sizes = {f"{X}{s}": len(rank[X]) for X in "AB" for s in "+-"}

    def slots(side, key, direction):
        r = rank[side][key]
        n = len(rank[side])
        minus, plus = (side + "-", r), (side + "+", n - 1 - r)
        return (minus, plus) if direction > 0 else (plus, minus)

    visited = set()
    comps = []
    for side in "AB":
        for s in strands[side]:
            if (side, s.cls, s.copy) in visited:
                continue
            seq, tags = [], set()
            cur_side, cur, forward = side, s, True
            while (cur_side, cur.cls, cur.copy) not in visited:
                visited.add((cur_side, cur.cls, cur.copy))
                tags.add(cur.tag)
                pts = cur.crossings if forward else tuple((k, -d) for k, d in reversed(cur.crossings))
                seq.extend(slots(cur_side, k, d) for k, d in pts)
                far = (cur.cls, cur.copy, not forward)
                cur_side, (ci, j, is_start) = across(cur_side, far)
                cur = index[cur_side][(ci, j)]
                forward = is_start
            if (cur_side, cur.cls, cur.copy) != (side, s.cls, s.copy) or not forward:
                raise InvalidSystem([Diagnostic("sigma", "gluing does not close curves consistently")])
            comps.append((tags, seq))
    edges, curves, used = [], {}, {}
    names = names or {}
    for tags, seq in comps:
        if not seq:
            raise InvalidSystem([Diagnostic("disjoint", f"a curve tagged {sorted(tags)} misses both disks")])
        if len(tags) != 1:
            raise InvalidSystem([Diagnostic("tags", f"one curve carries tags {sorted(tags)}")])
        tag = next(iter(tags))
        base = names.get(tag, tag)
        count = used.get(base, 0)
        used[base] = count + 1
        name = base if count == 0 else f"{base}.{count}"
        first = len(edges)
        for i in range(len(seq)):
            _, entry = seq[i - 1]
            exit_, _ = seq[i]
            edges.append((entry, exit_))
        curves[name] = first
    tw = {X: len(rank[X]) - 1 if rank[X] else 0 for X in "AB"}
    return CurveSystem(sizes, edges, tw, curves)


def end_tags(classes) -> str:
    """Tags of the arc ends around the puncture, one character per end."""
    return _end_tags_of(tuple(classes))


@lru_cache(maxsize=4096)
def _end_tags_of(classes: tuple) -> str:
    return "".join(_tag_char(classes[ci].tag_of(j)) for ci, j, _ in _ends_of(classes))


_CHARS: dict = {}


def _tag_char(tag: str) -> str:
    return _CHARS.setdefault(tag, chr(0x100 + len(_CHARS)))


def matching_twists(tags_a: str, tags_b: str) -> list[int]:
    """Twists t with tags_a[i] == tags_b[(t - i) % N] for every end i."""
    N = len(tags_a)
    if N != len(tags_b):
        return []
    if N == 0:
        return [0]
    rb = tags_b[0] + tags_b[:0:-1]  # rb[j] = tags_b[-j mod N]
    hay = rb + rb[:-1]
    out, k = [], hay.find(tags_a)
    while k != -1:
        out.append((-k) % N)
        k = hay.find(tags_a, k + 1)
    return sorted(out)


def consistent_twists(classes_a, classes_b) -> list[int]:
    """Twists whose gluing matches ends of equal tags and keeps every curve closed."""
    return matching_twists(end_tags(classes_a), end_tags(classes_b))


def systems(classes_a, classes_b, names=None):
    """All valid glued systems, one per consistent twist: yields (twist, system)."""
    for t in consistent_twists(classes_a, classes_b):
        try:
            sys = build(classes_a, classes_b, t, names)
        except InvalidSystem:
            continue
        yield t, sys
