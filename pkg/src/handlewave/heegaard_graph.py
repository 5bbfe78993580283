"""Heegaard (Whitehead) graphs of curves with respect to the cutting disks.

The graph has the four vertices A+, A-, B+, B-; every F0 edge of the curve is
a graph edge between the circles it joins.  Parallel edges are grouped into
classes, and each vertex records the cyclic order in which the classes leave
it, as inherited from the curve system.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .curvesys import CIRCLES, CurveSystem, _compress

VERTICES = CIRCLES
TYPE_A, TYPE_B = "TypeA", "TypeB"
TYPE_C_DISCONNECTED, TYPE_C_CUTVERTEX = "TypeC-disconnected", "TypeC-cutvertex"


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class EdgeClass:
    ends: tuple  # ((circle, first slot), (circle, first slot))
    multiplicity: int

    @property
    def vertices(self) -> tuple:
        return (self.ends[0][0], self.ends[1][0])


@dataclass(frozen=True)
class WhiteheadGraph:
    curves: tuple
    classes: tuple
    rotation: dict = field(default_factory=dict)  # vertex -> class indices in slot order
    signs: dict = field(default_factory=dict)  # disk -> tuple of ±1 in traversal order

    def degree(self, v: str) -> int:
        return sum(c.multiplicity * c.vertices.count(v) for c in self.classes)

    def multiplicity(self, u: str, v: str) -> int:
        key = sorted((u, v))
        return sum(c.multiplicity for c in self.classes if sorted(c.vertices) == key)

    def adjacency(self) -> dict:
        adj = {v: set() for v in VERTICES}
        for c in self.classes:
            u, v = c.vertices
            if u != v:
                adj[u].add(v)
                adj[v].add(u)
        return adj

    def to_dict(self) -> dict:
        return {
            "curves": list(self.curves),
            "vertices": list(VERTICES),
            "degrees": {v: self.degree(v) for v in VERTICES},
            "edge_classes": [
                {"ends": [list(e) for e in c.ends], "multiplicity": c.multiplicity} for c in self.classes
            ],
            "rotation": {v: list(self.rotation.get(v, [])) for v in VERTICES},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def whitehead_graph(sys: CurveSystem, curve=None) -> WhiteheadGraph:
    """Graph of one curve (or several, or all when ``curve`` is None)."""
    names = sys.names() if curve is None else ([curve] if isinstance(curve, str) else list(curve))
    sub = sys.restrict(names) if curve is not None else sys
    if not sub.edges:
        raise GraphError(f"curve {names} misses both cutting disks")
    runs = _compress(sub)
    classes = tuple(EdgeClass((tuple(r["class"][0]), tuple(r["class"][1])), r["count"]) for r in runs)
    member = {}
    for k, c in enumerate(classes):
        (c1, i1), (c2, i2) = c.ends
        for r in range(c.multiplicity):
            member[(c1, (i1 + r) % sub.sizes[c1])] = k
            member[(c2, (i2 - r) % sub.sizes[c2])] = k
    rotation = {}
    for v in VERTICES:
        order = []
        for i in range(sub.sizes[v]):
            k = member[(v, i)]
            if not order or order[-1] != k:
                order.append(k)
        if len(order) > 1 and order[0] == order[-1]:
            order.pop()
        rotation[v] = tuple(order)
    signs = {"A": [], "B": []}
    for name in names:
        for cr in sub.crossings(name):
            signs[cr.disk].append(cr.sign)
    return WhiteheadGraph(tuple(names), classes, rotation, {k: tuple(v) for k, v in signs.items()})


def graph_of_word(word: str) -> dict:
    """Edge multiset of the Whitehead graph read directly off a cyclic word."""
    into = {"A": "A+", "a": "A-", "B": "B+", "b": "B-"}
    out_of = {"A": "A-", "a": "A+", "B": "B-", "b": "B+"}
    edges = {}
    n = len(word)
    for i in range(n):
        x, y = word[i], word[(i + 1) % n]
        key = tuple(sorted((into[x], out_of[y]), key=VERTICES.index))
        edges[key] = edges.get(key, 0) + 1
    return edges


def is_positive(g: WhiteheadGraph) -> tuple[bool, dict]:
    """Positivity and the orientation witness.

    The witness gives, for each disk, the sign its crossings take; flipping
    the sign of a generator (or the curve) makes every crossing positive.
    """
    witness = {}
    for disk in "AB":
        s = set(g.signs.get(disk, ()))
        if len(s) > 1:
            return False, {"mixed": disk}
        witness[disk] = s.pop() if s else 1
    return True, {"invert_A": witness["A"] < 0, "invert_B": witness["B"] < 0}


def _connected(adj: dict, nodes) -> bool:
    nodes = set(nodes)
    if not nodes:
        return True
    start = next(iter(nodes))
    seen, stack = {start}, [start]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w in nodes and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == nodes


def connectivity_report(g: WhiteheadGraph) -> dict:
    adj = g.adjacency()
    connected = _connected(adj, VERTICES)
    cut = []
    if connected:
        for v in VERTICES:
            if not _connected(adj, [w for w in VERTICES if w != v]):
                cut.append(v)
    return {"connected": connected, "cut_vertices": cut}


def _is_type_a(g: WhiteheadGraph, x: str, y: str) -> bool:
    return g.multiplicity(x + "+", x + "-") > 0 and g.multiplicity(y + "+", y + "-") > 0


def classify_graph_type(g: WhiteheadGraph) -> str:
    rep = connectivity_report(g)
    if not rep["connected"]:
        return TYPE_C_DISCONNECTED
    if rep["cut_vertices"]:
        return TYPE_C_CUTVERTEX
    for x, y in (("A", "B"), ("B", "A")):
        if _is_type_a(g, x, y):
            return TYPE_A
    pairs = {tuple(sorted(c.vertices)) for c in g.classes}
    cross = {p for p in pairs if p[0][0] != p[1][0]}
    if len(cross) >= 3:
        return TYPE_B
    raise GraphError("graph realizes none of the planar patterns")
