"""Distinguished waves and the meridian candidates they produce.

A wave based at R is an arc in F0 whose ends lie on two edges of R, meeting
both from the same side (so the disk-crossing signs at the ends are
opposite).  Vertical waves run alongside a cutting-disk boundary between two
neighbouring R-crossings of opposite sign; horizontal waves join an A+A- edge
of R to a B+B- edge of R.  Surgery along a wave replaces R by two curves.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .curvesys import ArcRoute, CurveSystem, FaceMap, band_surgery, minimal_intersection, oriented_ends
from .freegroup import CyclicWord, HomologyVerdict, exponent_sums, homology_check, homology_det
from .heegaard_graph import classify_graph_type, connectivity_report, is_positive, whitehead_graph


class WaveError(ValueError):
    pass


@dataclass(frozen=True)
class Wave:
    kind: str  # "vertical" | "horizontal"
    base_curve: str
    route: ArcRoute
    signs: tuple = (1, -1)
    disk: str | None = None  # disk a vertical wave runs alongside
    slots: tuple = ()  # attachment slots of a vertical wave

    def as_dict(self) -> dict:
        return {"kind": self.kind, "base_curve": self.base_curve, "disk": self.disk,
                "route_length": self.route.length, "signs": list(self.signs)}


@dataclass(frozen=True)
class MeridianCandidate:
    name: str
    word: CyclicWord
    embedding: CurveSystem
    homology: HomologyVerdict
    wave_traversals: int
    det_with_R: int

    def as_dict(self) -> dict:
        return {"name": self.name, "word": self.word.letters, "homology": self.homology.as_dict(),
                "wave_traversals": self.wave_traversals, "det_with_R": self.det_with_R}


@dataclass
class WaveSearch:
    """Every wave of one kind found for R, with the one singled out."""

    kind: str
    waves: list = field(default_factory=list)
    chosen: Wave | None = None
    classes: int = 0
    reason: str = ""


def vertical_waves(sys: CurveSystem, R: str, disk: str) -> list[Wave]:
    """All arcs along the X+ side of D_X between neighbouring R-crossings of opposite sign."""
    circle = disk + "+"
    n = sys.sizes[circle]
    owner = sys.slot_owner()
    ends = oriented_ends(sys, R)
    fm = FaceMap(sys)
    r_slots = [i for i in range(n) if owner[(circle, i)] == R]
    out = []
    if len(r_slots) < 2:
        return out
    for j, i in enumerate(r_slots):
        i2 = r_slots[(j + 1) % len(r_slots)]
        s1, s2 = (circle, i), (circle, i2)
        k1, k2 = sys.edge_at(s1), sys.edge_at(s2)
        exits1 = ends[k1][1] == s1
        exits2 = ends[k2][1] == s2
        if exits1 == exits2 or k1 == k2:
            continue
        along1 = ends[k1][1] == s1
        along2 = ends[k2][0] == s2
        if along1 != along2:
            continue
        faces, crossed = [fm.face_of[s1]], []
        step = 1
        cur = (circle, (i + 1) % n)
        while cur != s2:
            k = sys.edge_at(cur)
            crossed.append((k, _crossing_sign(sys, k, cur)))
            faces.append(fm.face_of[cur])
            cur = (circle, (cur[1] + step) % n)
        route = ArcRoute(((k1, along1), (k2, along2)), tuple(faces), tuple(crossed))
        out.append(Wave("vertical", R, route, (1, -1) if exits1 else (-1, 1), disk, (s1, s2)))
    return out


def _crossing_sign(sys: CurveSystem, k: int, at) -> int:
    """Sign of an arc running forward along a circle past the edge end ``at``.

    Positive when the edge's curve leaves F0 at ``at`` (so it crosses the arc
    heading into the disk), negative when it enters there.
    """
    curve = sys.curve_of_edge()[k]
    ends = oriented_ends(sys, curve)
    return 1 if ends[k][1] == at else -1


def _bfs(fm: FaceMap, start: int, targets: dict, walls: set):
    prev = {start: None}
    queue = deque([start])
    while queue:
        f = queue.popleft()
        if f in targets:
            path, crossed = [f], []
            while prev[path[-1]] is not None:
                g, k, sign = prev[path[-1]]
                crossed.append((k, sign))
                path.append(g)
            return path[::-1], crossed[::-1], targets[f]
        for k, nxt, g in fm.neighbours(f, walls):
            if g not in prev:
                ends = oriented_ends(fm.sys, fm.sys.curve_of_edge()[k])
                sign = 1 if ends[k][0] == nxt else -1
                prev[g] = (f, k, sign)
                queue.append(g)
    return None


def horizontal_waves(sys: CurveSystem, R: str) -> list[Wave]:
    """Shortest arcs from each A+A- edge of R to a B+B- edge of R, met from one side."""
    ends = oriented_ends(sys, R)
    fm = FaceMap(sys)
    walls = set(ends)

    def kind(k):
        c1, c2 = ends[k][0][0], ends[k][1][0]
        return c1[0] if c1[0] == c2[0] and c1 != c2 else None

    aa = [k for k in ends if kind(k) == "A"]
    bb = [k for k in ends if kind(k) == "B"]
    out, seen = [], set()
    for along in (True, False):
        targets = {}
        for k in bb:
            start = ends[k][0] if along else ends[k][1]
            targets.setdefault(fm.side(k, start), k)
        for k in aa:
            start = ends[k][0] if along else ends[k][1]
            f = fm.side(k, start)
            found = _bfs(fm, f, targets, walls)
            if found is None:
                continue
            path, crossed, k2 = found
            key = (k, k2, along)
            if key in seen:
                continue
            seen.add(key)
            route = ArcRoute(((k, along), (k2, along)), tuple(path), tuple(crossed))
            out.append(Wave("horizontal", R, route, (1, -1) if along else (-1, 1)))
    return out


def surgery_words(sys: CurveSystem, wave: Wave) -> tuple:
    res = band_surgery(sys, wave.base_curve, wave.route)
    return tuple(sorted(min(w.letters, w.inverse().letters) for w in res.words().values()))


def candidates_for(sys: CurveSystem, wave: Wave) -> list[MeridianCandidate]:
    R = wave.base_curve
    r_word = CyclicWord.of(sys.traversal(R).raw_word)
    res = band_surgery(sys, R, wave.route)
    out = []
    for name, word, emb in res.components:
        if word == r_word or word == r_word.inverse():
            continue
        det = homology_det(sys.traversal(R).raw_word, word.letters)
        out.append(MeridianCandidate(name, word, emb, homology_check(word.letters),
                                     res.wave_traversals[name], det))
    return out


def _meridian_like(sys, wave) -> bool:
    """Homological necessary condition for a meridian of a knot exterior H[R]."""
    try:
        cands = candidates_for(sys, wave)
    except ValueError:
        return False
    return any(abs(c.det_with_R) == 1 and c.word.letters for c in cands)


def _choose(sys, waves, kind) -> WaveSearch:
    search = WaveSearch(kind, list(waves))
    if not waves:
        search.reason = "none found"
        return search
    groups = {}
    for w in waves:
        try:
            key = surgery_words(sys, w)
        except ValueError:
            continue
        groups.setdefault(key, []).append(w)
    search.classes = len(groups)
    good = [ws[0] for ws in groups.values() if _meridian_like(sys, ws[0])]
    if len(good) == 1:
        search.chosen = good[0]
        search.reason = "unique class with a homological meridian"
    elif good:
        search.chosen = min(good, key=lambda w: (w.route.length, w.disk or ""))
        search.reason = f"{len(good)} classes with a homological meridian; shortest kept"
    else:
        first = next(iter(groups.values()))[0] if groups else waves[0]
        search.chosen = first
        search.reason = "no class gives a homological meridian"
    return search


def gate(sys: CurveSystem, R: str) -> dict:
    g = whitehead_graph(sys, R)
    rep = connectivity_report(g)
    positive, witness = is_positive(g)
    return {"graph": g, "connected": rep["connected"], "cut_vertices": rep["cut_vertices"],
            "type": classify_graph_type(g), "positive": positive, "witness": witness,
            "passes": rep["connected"] and not rep["cut_vertices"]}


def search_waves(sys: CurveSystem, R: str, check_gate: bool = True) -> WaveSearch:
    info = gate(sys, R)
    if check_gate and not info["passes"]:
        raise WaveError("Heegaard diagram of R is disconnected or has a cut-vertex")
    if not info["positive"]:
        signs = info["graph"].signs
        waves = []
        for disk in "AB":
            if len(set(signs[disk])) > 1:
                waves.extend(vertical_waves(sys, R, disk))
        return _choose(sys, waves, "vertical")
    waves = horizontal_waves(sys, R)
    if not waves:
        raise WaveError("positive diagram without a horizontal wave (missing A+A- or B+B- edges)")
    return _choose(sys, waves, "horizontal")


def find_distinguished_wave(sys: CurveSystem, R: str) -> Wave:
    return search_waves(sys, R).chosen


def meridian_candidates(sys: CurveSystem, R: str) -> list[MeridianCandidate]:
    return candidates_for(sys, find_distinguished_wave(sys, R))


def wave_alpha_count(sys: CurveSystem, wave: Wave, alpha: str) -> dict:
    return {"unsigned": minimal_intersection(sys, wave.route, alpha),
            "signed": minimal_intersection(sys, wave.route, alpha, signed=True)}
