"""Parameterized (alpha, R) diagram families and the case analysis run on each.

Every family is drawn in the two-torus model (see :mod:`handlewave.tori`):
a band of connections with label n in a handle is a class of parallel arcs
whose vector has first coordinate n.  The A-handle frame is chosen with
det(v_P, v_R) = +1 (so P + R = Q), the B-handle frame mirrored,
det(v_S, v_U) = -1 (so S + U = T); with this choice the labels carry the
signs used when the sign cases of positive diagrams are enumerated.
"""
from __future__ import annotations

import itertools
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from dataclasses import asdict, dataclass, field
from math import gcd

from .curvesys import CurveSystem, InvalidSystem, _trace, canonical
from .freegroup import (CyclicWord, Endomorphism, Word, christoffel_word, count_cyclic_occurrences,
                        homology_check, homology_det, invert, is_primitive, power, presents_trivial_group,
                        same_up_to_symmetry, syllables)
from .heegaard_graph import GraphError, classify_graph_type
from .tori import ArcClass, build, consistent_twists, end_tags, matching_twists
from .waves import WaveError, candidates_for, gate, search_waves, wave_alpha_count

log = logging.getLogger(__name__)

FORMS = ("rectangular", "non-rectangular", "seifert-m")
FIGURES = ("noPS-a", "noPS-b", "withS-a", "withS-b", "m-no2-a", "m-no2-b", "m-with2-a", "m-with2-b")
BRANCHES = ("theorem-holds", "alpha-is-meridian-contradiction", "torsion-rejection",
            "nonhyperbolic-excluded", "reduction-applied")
#: figures the paper identifies with another one (same builder, relabelled weights)
ALIASES = {"noPS-b": "noPS-a"}


class FamilyError(ValueError):
    """A parameter choice violates a stated constraint; ``constraint`` names it."""

    def __init__(self, constraint: str, message: str = ""):
        super().__init__(f"{constraint}: {message}" if message else constraint)
        self.constraint = constraint


# -- parameters ---------------------------------------------------------------

@dataclass(frozen=True)
class AlphaParams:
    form: str
    P: int | None = None
    S: int = 2
    a: int = 1
    b: int = 1

    def check(self) -> list[str]:
        """Raise on violated invariants; return warnings for tolerated ones."""
        if self.form not in FORMS:
            raise FamilyError("form", f"unknown alpha form {self.form!r}")
        if self.S is None or self.S < 2:
            raise FamilyError("S>1", f"S={self.S}")
        if self.form == "seifert-m":
            return []
        if self.P is None or self.P < 2:
            raise FamilyError("P>1", f"P={self.P}")
        if self.form == "rectangular":
            if (self.a, self.b) != (1, 1):
                raise FamilyError("rectangular-single-band",
                                  "a rectangular curve crosses each handle in one connection; use a=b=1")
            return []
        if self.a < 1 or self.b < 1:
            raise FamilyError("a,b>0", f"a={self.a}, b={self.b}")
        if gcd(self.a, self.b) != 1:
            raise FamilyError("gcd(a,b)=1", f"a={self.a}, b={self.b}")
        if self.a < 2 or self.b < 2:
            return [f"a={self.a}, b={self.b} lies outside the caption range a,b>1"]
        return []


@dataclass(frozen=True)
class RFamilyParams:
    figure: str
    R: int | None = None
    U: int | None = None
    a: int = 1
    b: int = 1
    c: int = 1
    Q: int | None = None
    T: int | None = None
    s: int | None = None

    def canonical_figure(self) -> str:
        return ALIASES.get(self.figure, self.figure)

    def weight_violations(self) -> list[str]:
        """Positivity constraints the text imposes on hyperbolic instances."""
        a, b, c = self.a, self.b, self.c
        need = {
            "noPS-a": (a > 0 and b > 0 and c > 0, "a,b,c>0"),
            "noPS-b": (a > 0 and b > 0 and c > 0, "a,b,c>0"),
            "withS-a": (c > 0, "c>0"),
            "withS-b": (b > 0, "b>0"),
            "m-no2-a": (a > 0 and b > 0, "a,b>0"),
            "m-no2-b": (a + b > 0, "a+b>0"),
            "m-with2-a": (a > 0 and b > 0, "a,b>0"),
            "m-with2-b": (b > 0 and c > 0, "b,c>0"),
        }
        ok, text = need[self.figure]
        return [] if ok else [text]


@dataclass(frozen=True)
class NonhypShapeParams:
    """One band (label m) on the A-handle, bands n and s with weights a, b on the other."""

    a: int
    b: int
    m: int
    n: int
    s: int

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or gcd(self.a, self.b) != 1:
            raise FamilyError("a,b>=0, gcd(a,b)=1", f"a={self.a}, b={self.b}")


def nonhyp_shape_word(p: NonhypShapeParams) -> CyclicWord:
    """Word of a curve with the one-band/two-band shape: the (a,b) pattern of A^m B^n, A^m B^s."""
    x, y = power("A", p.m) + power("B", p.n), power("A", p.m) + power("B", p.s)
    pattern = christoffel_word(p.a, p.b).letters if p.a and p.b else ("A" if p.a else "B")
    return CyclicWord.of("".join(x if ch == "A" else y for ch in pattern))


# -- frames -------------------------------------------------------------------

def farey_partner(base: int, label: int, det: int, y0: int | None = None):
    """Vectors (base, y0) and (label, y) with base*y - label*y0 = det.

    ``y0`` is searched in [0, base) when not given; returns None when no
    such pair exists.
    """
    choices = [y0] if y0 is not None else range(base)
    for p in choices:
        if gcd(base, p) != 1:
            continue
        num = det + label * p
        if num % base == 0:
            return (base, p), (label, num // base)
    return None


def _add(u, v):
    return (u[0] + v[0], u[1] + v[1])


def _det(u, v):
    return u[0] * v[1] - u[1] * v[0]


def _b_frame(S, U):
    fr = farey_partner(S, U, -1)
    if fr is None:
        raise FamilyError("gcd(S,U)=1", f"S={S}, U={U}")
    vS, vU = fr
    vT = _add(vS, vU)
    if vT[0] == 0:
        raise FamilyError("T!=0", f"S+U=0 for S={S}, U={U}")
    return vS, vU, vT


def _a_frame(P, R):
    fr = farey_partner(P, R, 1)
    if fr is None:
        raise FamilyError("gcd(P,R)=1", f"P={P}, R={R}")
    vP, vR = fr
    vQ = _add(vP, vR)
    if vQ[0] == 0:
        raise FamilyError("Q!=0", f"P+R=0 for P={P}, R={R}")
    return vP, vR, vQ


# -- alpha --------------------------------------------------------------------

def alpha_classes(alpha: AlphaParams, vS, vP=None) -> tuple[dict, dict]:
    if alpha.form == "rectangular":
        return {vP: 1}, {vS: 1}
    if alpha.form == "non-rectangular":
        P = alpha.P
        return {(P, 1): alpha.a, (P + 1, 1): alpha.b}, {vS: alpha.a + alpha.b}
    return {(1, 0): 1, (1, 1): 1}, {vS: 2}


@lru_cache(maxsize=None)
def alpha_word(alpha: AlphaParams) -> str:
    """Canonical word of alpha (positive in both generators for the Seifert-d forms)."""
    alpha.check()
    S = alpha.S
    if alpha.form == "rectangular":
        return "A" * alpha.P + "B" * S
    if alpha.form == "seifert-m":
        return "A" + "B" * S + "a" + "B" * S
    ca, cb = alpha_classes(alpha, (S, 1))
    A = [ArcClass(v, w, "alpha") for v, w in sorted(ca.items())]
    B = [ArcClass(v, w, "alpha") for v, w in cb.items()]
    for t in consistent_twists(A, B):
        sys = build(A, B, t)
        if len(sys.names()) == 1:
            w = sys.traversal("alpha").raw_word
            if w.isupper():
                return CyclicWord.of(w).letters
    raise FamilyError("alpha-form", "no twist closes alpha into a positive curve")


def alpha_system(alpha: AlphaParams) -> CurveSystem:
    """alpha alone, drawn in its canonical form."""
    alpha.check()
    target = CyclicWord.of(alpha_word(alpha))
    vS = (alpha.S, 1)
    vP = (alpha.P, 1) if alpha.form == "rectangular" else None
    ca, cb = alpha_classes(alpha, vS, vP)
    A = [ArcClass(v, w, "alpha") for v, w in sorted(ca.items())]
    B = [ArcClass(v, w, "alpha") for v, w in cb.items()]
    for t in consistent_twists(A, B):
        sys = build(A, B, t)
        if sys.names() == ["alpha"] and CyclicWord.of(sys.traversal("alpha").raw_word) in (target, target.inverse()):
            return sys
    raise FamilyError("alpha-form", "alpha does not close up")


# -- built systems ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FamilySystem(CurveSystem):
    """A curve system that remembers the band structure it was drawn from."""

    bands: dict = field(default_factory=dict)  # curve -> {"A": {vector: weight}, "B": {...}}
    params: dict = field(default_factory=dict)


def _interleavings(w_alpha: int, m_r: int):
    n = w_alpha + m_r
    for pos in itertools.combinations(range(n), w_alpha):
        yield tuple("alpha" if i in pos else "R" for i in range(n))


def _class_options(alpha: dict, r: dict):
    vecs = sorted(set(alpha) | set(r))
    options = []
    for v in vecs:
        wa, wr = alpha.get(v, 0), r.get(v, 0)
        if wa and wr:
            options.append([ArcClass.mixed(v, t) for t in _interleavings(wa, wr)])
        elif wa:
            options.append([ArcClass(v, wa, "alpha")])
        elif wr:
            options.append([ArcClass(v, wr, "R")])
    return itertools.product(*options)


def _compatible(classes) -> bool:
    vs = list(classes)
    return all(abs(_det(u, v)) <= 1 for u, v in itertools.combinations(vs, 2))


def joint_systems(alpha_a: dict, alpha_b: dict, r_a: dict, r_b: dict, target_alpha: str | None = None):
    """Every single-curve drawing of alpha and R with the given band weights."""
    if not (_compatible(set(alpha_a) | set(r_a)) and _compatible(set(alpha_b) | set(r_b))):
        return
    if sum(alpha_a.values()) + sum(r_a.values()) != sum(alpha_b.values()) + sum(r_b.values()):
        return
    bands = {"alpha": {"A": dict(alpha_a), "B": dict(alpha_b)}, "R": {"A": dict(r_a), "B": dict(r_b)}}
    sides_b = [(cb, end_tags(cb)) for cb in _class_options(alpha_b, r_b)]
    for ca in _class_options(alpha_a, r_a):
        tags_a = end_tags(ca)
        for cb, tags_b in sides_b:
            for t in matching_twists(tags_a, tags_b):
                try:
                    sys = build(ca, cb, t)
                except InvalidSystem:
                    continue
                if sorted(sys.names()) != ["R", "alpha"]:
                    continue
                if target_alpha is not None:
                    w = sys.traversal("alpha").raw_word
                    if CyclicWord.of(w) not in (CyclicWord.of(target_alpha), CyclicWord.of(invert(target_alpha))):
                        continue
                yield FamilySystem(sys.sizes, sys.edges, sys.twists, sys.curves, bands=bands)


def _r_options(alpha: AlphaParams, r: RFamilyParams):
    """(vS, vP, list of (R A-weights, R B-weights)) for a figure."""
    fig = r.figure
    a, b, c = r.a, r.b, r.c
    if min(a, b, c) < 0:
        raise FamilyError("weights>=0", f"a={a}, b={b}, c={c}")
    m_fig = fig.startswith("m-")
    if m_fig != (alpha.form == "seifert-m"):
        raise FamilyError("figure-form", f"figure {fig} does not go with a {alpha.form} curve")
    S = alpha.S
    if r.U is None:
        raise FamilyError("U", "label U is required")
    vS, vU, vT = _b_frame(S, r.U)
    if r.T is not None and r.T != S + r.U:
        raise FamilyError("S+U=T", f"S={S}, U={r.U}, T={r.T}")
    if r.s is not None and r.s % S != vS[1] % S:
        raise FamilyError("s", f"s={r.s} is not the slope matching U={r.U}")
    if m_fig:
        # counts forced by disjointness from alpha: the vertical 1-band carries
        # two arcs per S-arc of R, the remaining A-arcs form the 0- or 2-band
        if fig == "m-no2-a":
            xu, xt, xs, extra = a, b, a + b, 0
        elif fig == "m-no2-b":
            xu, xt, xs, extra = a, b, a + b + c, c
        elif fig == "m-with2-a":
            xu, xs, xt = a, b, c
            extra = a + c - b
        else:
            xu, xt, xs = a, b, c
            extra = a + b - c
        if extra < 0 or (extra == 0 and fig.startswith("m-with2")):
            raise FamilyError("band-count", f"{fig} needs a {'positive' if fig.startswith('m-with2') else 'nonnegative'}"
                                            " number of extra A-connections")
        rb = {v: m for v, m in ((vU, xu), (vS, xs), (vT, xt)) if m}
        ra = {(1, 0): 2 * xs}
        if extra:
            ra[(0, 1) if fig.startswith("m-no2") else (2, 1)] = extra
        ra = {v: m for v, m in ra.items() if m}
        return vS, None, [(ra, rb)]
    if fig.startswith("noPS"):
        wb = {vU: b + c, vT: a} if fig == "noPS-a" else {vU: c, vT: a + b}
    else:
        if fig == "withS-a" and not (r.U > 0 or r.U < -S):
            raise FamilyError("withS-a-signs", "U and T=S+U must have the same sign")
        if fig == "withS-b" and not (-S < r.U < 0):
            raise FamilyError("withS-b-signs", "U and T=S+U must have opposite signs")
        wb = {vS: 2 * b, vT: a, vU: c}
    rb = {v: m for v, m in wb.items() if m}
    n = sum(rb.values())
    if alpha.form == "rectangular":
        if r.R is None:
            raise FamilyError("R", "label R is required")
        vP, vR, vQ = _a_frame(alpha.P, r.R)
        if r.Q is not None and r.Q != alpha.P + r.R:
            raise FamilyError("P+R=Q", f"P={alpha.P}, R={r.R}, Q={r.Q}")
        if fig.startswith("noPS"):
            wa = {vQ: a + b, vR: c} if fig == "noPS-a" else {vQ: a, vR: b + c}
            splits = [{v: m for v, m in wa.items() if m}]
        else:
            splits = [{v: m for v, m in ((vQ, k), (vR, n - k)) if m} for k in range(n + 1)]
        return vS, vP, [(ra, rb) for ra in splits]
    # non-rectangular: R shares alpha's A-bands and/or a third band of the triangle
    P = alpha.P
    out = []
    for third in ((1, 0), (2 * P + 1, 2)):
        for x1 in range(n + 1):
            for x2 in range(n + 1 - x1):
                ra = {v: m for v, m in (((P, 1), x1), ((P + 1, 1), x2), (third, n - x1 - x2)) if m}
                out.append((ra, rb))
    return vS, None, out


def realizations(alpha: AlphaParams, r: RFamilyParams):
    """All drawings of the figure, deduplicated, in a deterministic order."""
    alpha.check()
    vS, vP, options = _r_options(alpha, r)
    target = alpha_word(alpha) if alpha.form == "non-rectangular" else None
    aA, aB = alpha_classes(alpha, vS, vP)
    seen = set()
    for ra, rb in options:
        for sys in joint_systems(aA, aB, ra, rb, target):
            w = sys.traversal("alpha").raw_word
            if target is None and not same_up_to_symmetry(w, alpha_word(alpha)):
                continue
            key = canonical(sys).to_json()
            if key in seen:
                continue
            seen.add(key)
            params = {"alpha": asdict(alpha), "r": asdict(r)}
            yield FamilySystem(sys.sizes, sys.edges, sys.twists, sys.curves, bands=sys.bands, params=params)


def build_pair(alpha: AlphaParams, r: RFamilyParams) -> FamilySystem:
    for sys in realizations(alpha, r):
        return sys
    raise FamilyError("realizable", f"no simple closed R is drawn by {r.figure} with {asdict(r)}")


# -- hyperbolicity proxies ----------------------------------------------------

def word_band_counts(word) -> dict:
    """Bands per handle as seen by a word: distinct signed syllable exponents.

    This cannot see 0-connections (arcs that cross a handle's torus without
    meeting its disk), so drawn systems use their recorded bands instead.
    """
    out = {"A": set(), "B": set()}
    for g, e in syllables(word):
        out[g].add(e)
    return {k: len(v) for k, v in out.items()}


def band_counts(sys: CurveSystem, R: str = "R") -> dict:
    bands = getattr(sys, "bands", {}) or {}
    if R in bands:
        return {X: len(bands[R][X]) for X in "AB"}
    return word_band_counts(sys.traversal(R).raw_word)


def is_nonhyperbolic_form(sys: CurveSystem, R: str = "R") -> bool:
    """One band of connections on one handle and at most two on the other."""
    n = band_counts(sys, R)
    return (n["A"] <= 1 and n["B"] <= 2) or (n["B"] <= 1 and n["A"] <= 2)


def hyperbolicity_proxies(sys: CurveSystem, R: str = "R") -> list[str]:
    """Reasons H[R] is certainly not a hyperbolic knot exterior (empty if none apply)."""
    word = sys.traversal(R).raw_word
    out = []
    if is_nonhyperbolic_form(sys, R):
        out.append("nonhyperbolic-shape")
    if homology_check(word).gcd != 1:
        out.append("homology-gcd")
    if is_primitive(word):
        out.append("primitive")
    return out


# -- the separating curve Gamma -----------------------------------------------

def _nonrect_params(word: str):
    """(P, S, a, b) read off a canonical non-rectangular alpha word."""
    syl = syllables(word)
    if any(e < 0 for _, e in syl):
        syl = syllables(invert(word))
    ea = sorted({e for g, e in syl if g == "A"})
    eb = {e for g, e in syl if g == "B"}
    if len(ea) != 2 or ea[1] != ea[0] + 1 or len(eb) != 1 or any(e < 0 for _, e in syl):
        return None
    P, S = ea[0], eb.pop()
    a = sum(1 for g, e in syl if g == "A" and e == P)
    b = sum(1 for g, e in syl if g == "A" and e == P + 1)
    return P, S, a, b


def build_gamma(sys: CurveSystem, S: int) -> FamilySystem:
    """Redraw alpha together with the separating curve Gamma it misses.

    Gamma is drawn as two (1,0) arcs on the A-torus and two S-arcs on the
    B-torus straddling alpha's S-band, which is how it sits in the joint
    diagram of alpha and Gamma.  Other curves of ``sys`` are dropped: they
    may cross Gamma.
    """
    w = sys.traversal("alpha").raw_word
    found = _nonrect_params(w)
    if found is None:
        raise FamilyError("non-rectangular", "Gamma is defined for a non-rectangular alpha only")
    P, S0, a, b = found
    if S0 != S:
        raise FamilyError("S", f"alpha has S={S0}, not {S}")
    vS = (S, 1)
    A = [ArcClass((1, 0), 2, "Gamma"), ArcClass((P, 1), a, "alpha"), ArcClass((P + 1, 1), b, "alpha")]
    tags = ("Gamma",) + ("alpha",) * (a + b) + ("Gamma",)
    B = [ArcClass.mixed(vS, tags)]
    target = CyclicWord.of(alpha_word(AlphaParams("non-rectangular", P, S, a, b)))
    for t in consistent_twists(A, B):
        try:
            g = build(A, B, t)
        except InvalidSystem:
            continue
        if sorted(g.names()) != ["Gamma", "alpha"]:
            continue
        if CyclicWord.of(g.traversal("alpha").raw_word) not in (target, target.inverse()):
            continue
        bands = {"alpha": {"A": {(P, 1): a, (P + 1, 1): b}, "B": {vS: a + b}},
                 "Gamma": {"A": {(1, 0): 2}, "B": {vS: 2}}}
        return FamilySystem(g.sizes, g.edges, g.twists, g.curves, bands=bands,
                            params={"alpha": asdict(AlphaParams("non-rectangular", P, S, a, b))})
    raise FamilyError("gamma", "no drawing of Gamma disjoint from alpha")


def gamma_sides(sys: CurveSystem, name: str = "Gamma") -> list[set]:
    """Regions of the surface cut along ``name``, as sets of curve names touching them.

    Two faces of the fat graph are joined when they share an edge of another
    curve or glued stretches of a disk boundary; Gamma separates exactly
    when two regions remain.
    """
    from .curvesys import FaceMap
    fm = FaceMap(sys)
    parent = list(range(len(fm.faces)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner = sys.curve_of_edge()
    for k, (s1, s2) in enumerate(sys.edges):
        if owner[k] != name:
            parent[find(fm.side(k, s1))] = find(fm.side(k, s2))
    for circle in ("A+", "B+"):
        for i in range(sys.sizes[circle]):
            s = (circle, i)
            t = sys.glue(sys.next_slot(s))
            parent[find(fm.face_of[s])] = find(fm.face_of[t])
    regions = {}
    for f in range(len(fm.faces)):
        regions.setdefault(find(f), set())
    for k, (s1, s2) in enumerate(sys.edges):
        if owner[k] != name:
            regions[find(fm.side(k, s1))].add(owner[k])
    return list(regions.values())


def gamma_intersection_bound(alpha_w: str, r_w: str, gamma_w: str) -> dict:
    """Certified lower bound on |R ∩ Gamma| with the reason.

    If R missed Gamma it would lie in F (then R is alpha or parallel to
    Gamma) or in F', whose curves cross D_A only in single (label 1)
    connections, so every A-syllable of their words is A^{±1}.  Gamma is
    separating, so a nonzero intersection is at least 2.
    """
    cw = CyclicWord.of(r_w)
    same = {CyclicWord.of(alpha_w), CyclicWord.of(invert(alpha_w)), CyclicWord.of(gamma_w),
            CyclicWord.of(invert(gamma_w))}
    if cw in same:
        return {"bound": 0, "reason": "R is alpha or Gamma"}
    big = max((abs(e) for g, e in syllables(r_w) if g == "A"), default=0)
    if big >= 2:
        return {"bound": 2, "reason": f"R has an A-syllable of exponent {big}, impossible in F'"}
    return {"bound": 0, "reason": "no certificate"}


# -- redrawing from words -----------------------------------------------------

MIRROR_A = Endomorphism.of("a", "B")
MIRROR_B = Endomorphism.of("A", "b")
SWAP = Endomorphism.of("B", "a")  # (A, B) -> (B, A^-1), orientation preserving


def _label_counts(words: dict, gen: str) -> dict:
    """curve -> {|exponent|: number of syllables} for one generator."""
    out = {}
    for name, w in words.items():
        cnt = {}
        for g, e in syllables(w):
            if g == gen:
                cnt[abs(e)] = cnt.get(abs(e), 0) + 1
        out[name] = cnt
    return out


def _frames(labels) -> list[list[tuple]]:
    """Sets of pairwise compatible vectors carrying every label, one per label
    (two for label 1 when both fit), up to the shear fixing the disk."""
    labels = sorted(set(labels), reverse=True)
    if not labels:
        return [[]]
    n1 = labels[0]
    out = []
    for y1 in range(n1):
        if gcd(n1, y1) != 1:
            continue
        v1 = (n1, y1)
        choices = []
        for n in labels[1:]:
            opts = [(n, y) for y in range(-n1 - 1, n1 + 2)
                    if gcd(n, y) == 1 and abs(_det(v1, (n, y))) == 1]
            if n == 1:
                opts = [[v] for v in opts] + [list(p) for p in itertools.combinations(opts, 2)]
            else:
                opts = [[v] for v in opts]
            choices.append(opts)
        if n1 == 1:
            choices.append([[], [(1, 1)]])
        for pick in itertools.product(*choices):
            vecs = [v1] + [v for group in pick for v in group]
            if len(set(vecs)) == len(vecs) and _compatible(vecs):
                out.append(vecs)
    return out


def _splits(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for k in range(total + 1):
        for rest in _splits(total - k, parts - 1):
            yield (k,) + rest


def _weight_options(counts: dict, vecs) -> list[dict]:
    """Assignments curve -> {vector: weight} distributing each label over its vectors."""
    by_label = {}
    for v in vecs:
        by_label.setdefault(v[0], []).append(v)
    per_curve = []
    for name, cnt in counts.items():
        opts = []
        for label, k in sorted(cnt.items()):
            vs = by_label.get(label)
            if not vs:
                return []
            opts.append([dict((v, m) for v, m in zip(vs, sp) if m) for sp in _splits(k, len(vs))])
        per_curve.append([(name, {v: m for d in pick for v, m in d.items()})
                          for pick in itertools.product(*opts)])
    return [dict(pick) for pick in itertools.product(*per_curve)]


def _mixed_classes(weights: dict):
    """Arc classes for curve -> {vector: weight}, over every interleaving of shared vectors."""
    vecs = sorted({v for d in weights.values() for v in d})
    options = []
    for v in vecs:
        owners = [(n, d[v]) for n, d in sorted(weights.items()) if v in d]
        tags = [n for n, m in owners for _ in range(m)]
        perms = sorted(set(itertools.permutations(tags))) if len(owners) > 1 else [tuple(tags)]
        options.append([ArcClass.mixed(v, p) for p in perms])
    return itertools.product(*options)


def realize(words: dict, limit: int | None = 1) -> list[FamilySystem]:
    """Systems in the two-torus model whose curves read exactly ``words``.

    Each curve is matched cyclically and up to its own orientation.  Curves
    are assumed to have no 0-connections (every arc crosses its torus's disk),
    which is what the reductions produce.
    """
    targets = {n: {CyclicWord.of(w), CyclicWord.of(invert(w))} for n, w in words.items()}
    ca, cb = _label_counts(words, "A"), _label_counts(words, "B")
    found, seen = [], set()
    la = {l for c in ca.values() for l in c}
    lb = {l for c in cb.values() for l in c}
    for fa in _frames(la):
        for wa in _weight_options(ca, fa):
            if not all(_compatible(set(d)) for d in wa.values()):
                continue
            for fb in _frames(lb):
                for wb in _weight_options(cb, fb):
                    if sum(sum(d.values()) for d in wa.values()) != sum(sum(d.values()) for d in wb.values()):
                        continue
                    sides_b = [(B, end_tags(B)) for B in _mixed_classes(wb)]
                    for A in _mixed_classes(wa):
                        tags_a = end_tags(A)
                        for B, tags_b in sides_b:
                            for t in matching_twists(tags_a, tags_b):
                                try:
                                    sys = build(A, B, t)
                                except InvalidSystem:
                                    continue
                                if sorted(sys.names()) != sorted(words):
                                    continue
                                if any(CyclicWord.of(sys.traversal(n).raw_word) not in targets[n] for n in words):
                                    continue
                                key = canonical(sys).to_json()
                                if key in seen:
                                    continue
                                seen.add(key)
                                bands = {n: {"A": dict(wa[n]), "B": dict(wb[n])} for n in words}
                                found.append(FamilySystem(sys.sizes, sys.edges, sys.twists, sys.curves, bands=bands))
                                if limit and len(found) >= limit:
                                    return found
    return found


# -- cutting-disk changes -----------------------------------------------------

def _is_positive_word(w: str) -> bool:
    return all(len({x for x in w if x.upper() == g}) <= 1 for g in "AB")


def ab_measure(word) -> int:
    """|AB| of a word: occurrences of AB once it is made positive, else the A-syllable count."""
    w = str(word)
    if _is_positive_word(w):
        return count_cyclic_occurrences(w.upper(), "AB")
    return sum(1 for g, _ in syllables(w) if g == "A")


def alpha_form_of(word: str) -> str | None:
    """Which canonical alpha form a word has, up to symmetry."""
    syl = syllables(word)
    if len(syl) == 2:
        return "rectangular" if min(abs(e) for _, e in syl) > 1 else None
    if len(syl) == 4:
        ea = [e for g, e in syl if g == "A"]
        eb = [e for g, e in syl if g == "B"]
        for xs, ys in ((ea, eb), (eb, ea)):
            if sorted(xs) == [-1, 1] and ys[0] == ys[1] and abs(ys[0]) > 1:
                return "seifert-m"
    if _nonrect_params(word) is not None or _nonrect_params(invert(word)) is not None:
        return "non-rectangular"
    return None


def _oriented(w: str, sign_a: int, sign_b: int) -> str:
    """w read so that its A and B exponents carry the given signs (w positive)."""
    for cand in (w, invert(w)):
        if all((x.isupper() if x.upper() == "A" else True) == (sign_a > 0) for x in cand if x.upper() == "A") and \
                all(x.isupper() == (sign_b > 0) for x in cand if x.upper() == "B"):
            return cand
    return ""


def _seifert_m_T(r_word: str, S: int):
    """Exponents T with B^S A B^T A B^S a cyclic subword of R made positive."""
    syl = syllables(r_word.upper())
    n = len(syl)
    out = set()
    for i in range(n):
        seq = [syl[(i + k) % n] for k in range(5)]
        if [g for g, _ in seq] == ["B", "A", "B", "A", "B"] and seq[0][1] == seq[4][1] == S \
                and seq[1][1] == seq[3][1] == 1 and seq[2][1] != S:
            out.add(seq[2][1])
    return sorted(out)


def reduction_trigger(sys: CurveSystem) -> dict | None:
    """The cutting-disk change that applies to a positive R with a cut vertex, if any.

    Returns ``{"kind", "T"}``: ``rectangular-cut-vertex`` when alpha is
    A^2 B^S and every A-syllable of R is A^{±1} (the (P,Q,R)=(2,1,-1)
    configuration), ``seifert-m-subword`` when R contains B^S A B^T A B^S.
    """
    info = gate(sys, "R")
    if info["passes"] or not info["positive"] or not info["cut_vertices"]:
        return None
    aw, rw = sys.traversal("alpha").raw_word, sys.traversal("R").raw_word
    form = alpha_form_of(aw)
    syl_r = syllables(rw)
    if form == "rectangular":
        ea = [abs(e) for g, e in syllables(aw) if g == "A"]
        eb = [abs(e) for g, e in syllables(aw) if g == "B"]
        if ea == [2] and all(abs(e) == 1 for g, e in syl_r if g == "A"):
            return {"kind": "rectangular-cut-vertex", "T": eb[0]}
        return None
    if form == "seifert-m":
        S = max(abs(e) for _, e in syllables(aw))
        cands = _seifert_m_T(rw, S)
        if cands:
            return {"kind": "seifert-m-subword", "T": cands[-1]}
    return None


def _apply(phi: Endomorphism, words: dict) -> dict:
    return {n: CyclicWord.of(phi.apply_word(w)).letters for n, w in words.items()}


def _normalize_words(words: dict, form: str):
    """Generator sign flips making alpha positive, plus R read positively where possible."""
    steps = []
    aw = words["alpha"]
    if form == "rectangular":
        if not any(x == "A" for x in aw):
            aw = invert(aw)
        if any(x == "b" for x in aw):
            words = _apply(MIRROR_B, words)
            steps.append(("mirror-B", MIRROR_B))
    rw = words["R"]
    if _is_positive_word(rw):
        # choose the orientation of R whose B-exponents are positive
        if any(x == "b" for x in rw):
            if form == "seifert-m":
                words = _apply(MIRROR_B, words)
                steps.append(("mirror-B", MIRROR_B))
            else:
                words = dict(words, R=invert(rw))
        rw = words["R"]
        if form == "seifert-m" and any(x == "a" for x in rw):
            words = _apply(MIRROR_A, words)
            steps.append(("mirror-A", MIRROR_A))
    return words, steps


def reduction_step(sys: CurveSystem, T: int) -> FamilySystem:
    """Apply the cutting-disk change A -> A B^{-T} and redraw alpha and R.

    In the rectangular case the change is followed by the homeomorphism
    that puts alpha back into rectangular form: the swap (A,B) -> (B,A^-1)
    when the new R has an A-syllable of length > 1, a mirror otherwise.
    The words of the returned system equal the images of the old words
    under the composite recorded in ``params["reduction"]``.
    """
    trig = reduction_trigger(sys)
    if trig is None:
        raise FamilyError("trigger", "R is not a positive cut-vertex configuration with a known reduction")
    if T != trig["T"]:
        raise FamilyError("trigger", f"the configuration calls for T={trig['T']}, not {T}")
    form = alpha_form_of(sys.traversal("alpha").raw_word)
    words = {n: sys.traversal(n).raw_word for n in ("alpha", "R")}
    before = ab_measure(words["R"])
    words, steps = _normalize_words(words, form)
    phi = Endomorphism.of("A" + "b" * T, "B")
    words = _apply(phi, words)
    steps.append((f"A->AB^-{T}", phi))
    changed = dict(words)
    if form == "rectangular":
        big = max((abs(e) for g, e in syllables(words["R"]) if g == "A"), default=0)
        follow = ("swap", SWAP) if big > 1 else ("mirror-B", MIRROR_B)
        words = _apply(follow[1], words)
        steps.append(follow)
    found = realize(words)
    if not found:
        for label, m in (("mirror-A", MIRROR_A), ("mirror-B", MIRROR_B), ("mirror-AB", MIRROR_A.compose(MIRROR_B))):
            alt = _apply(m, words)
            found = realize(alt)
            if found:
                words = alt
                steps.append((label, m))
                break
    if not found:
        raise FamilyError("redraw", f"no two-torus drawing of {words}")
    composite = steps[0][1]
    for _, m in steps[1:]:
        composite = m.compose(composite)
    after = ab_measure(words["R"])
    prev = dict(getattr(sys, "params", {}) or {})
    red = dict(prev.get("reduction", {"steps": [], "ab": [before]}))
    red = {"steps": list(red["steps"]) + [label for label, _ in steps], "ab": list(red["ab"]) + [after],
           "rounds": list(red.get("rounds", [])) + [{
               "kind": trig["kind"], "T": T, "composite": str(composite),
               "after_disk_change": changed, "words": dict(words)}]}
    out = found[0]
    return FamilySystem(out.sizes, out.edges, out.twists, out.curves, bands=out.bands,
                        params=dict(prev, reduction=red))


# -- case analysis ------------------------------------------------------------

MAX_REDUCTIONS = 16


@dataclass
class CaseReport:
    params: dict
    words: dict
    proxies: list
    positive: bool | None = None
    graph_type: str | None = None
    gate: dict = field(default_factory=dict)
    wave: dict | None = None
    counts: dict | None = None
    candidates: list = field(default_factory=list)
    branch: str | None = None
    final_branch: str | None = None
    reduction: dict | None = None
    reduced: dict | None = None
    certificates: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    @property
    def in_hypothesis(self) -> bool:
        return in_hypothesis(self.final())

    def meridians(self) -> list[dict]:
        """Candidates passing the homological meridian test |det(R, M)| = 1."""
        return [c for c in self.candidates if abs(c["det_with_R"]) == 1]

    def final(self) -> dict:
        """The report dict of the case the analysis ended on (after any reductions)."""
        d = self.as_dict()
        while d.get("reduced"):
            d = d["reduced"]
        return d

    def as_dict(self) -> dict:
        return asdict(self)


def in_hypothesis(report: dict) -> bool:
    """Whether the homological shadows of the theorem's hypotheses all hold for a report dict."""
    c = report.get("certificates") or {}
    return bool(c) and c["proxies_clean"] and bool(c["knot_exterior"]) and not c["alpha_meridian"]


def _jsonable(x):
    if isinstance(x, dict):
        return {(",".join(map(str, k)) if isinstance(k, tuple) else str(k)): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _branch(counts: dict, candidates: list) -> str | None:
    """Verdict from the wave/alpha counts and the candidates' homology.

    Every candidate is a meridian representative, so each must pass the
    homological tests: |det(R, M)| = 1 (filling H[R] along M gives a
    homology ball) and gcd 1 (H[M] has torsion-free homology).
    """
    if counts["unsigned"] == 0 or counts["signed"] == 0:
        return "alpha-is-meridian-contradiction"
    if any(c["homology"]["gcd"] != 1 or abs(c["det_with_R"]) != 1 for c in candidates):
        return "torsion-rejection"
    if candidates and all(c["alpha_intersection"] == 1 for c in candidates):
        return "theorem-holds"
    return None


def _certificates(rep: CaseReport) -> dict:
    """Checks of the hypotheses that do not depend on the wave/alpha counts.

    If H[R] is a knot exterior some wave candidate is a meridian, so a
    candidate with |det(R, M)| = 1 must exist.  Alpha is a meridian of H[R]
    exactly when filling along it gives S^3, i.e. when <A, B | R, alpha> is
    trivial; |det(R, alpha)| = 1 is the cheap necessary part, checked first.
    """
    d = homology_det(rep.words["alpha"], rep.words["R"])
    ext = any(abs(c["det_with_R"]) == 1 for c in rep.candidates) if rep.candidates else None
    merid = abs(d) == 1 and presents_trivial_group([rep.words["alpha"], rep.words["R"]]) is True
    return {"proxies_clean": not rep.proxies, "knot_exterior": ext, "det_alpha_R": d,
            "alpha_meridian": merid}


def analyze_case(sys: CurveSystem, _depth: int = 0) -> CaseReport:
    """Run the whole case analysis for the pair (alpha, R) of ``sys``."""
    params = _jsonable(dict(getattr(sys, "params", {}) or {}))
    words = {n: sys.traversal(n).raw_word for n in ("alpha", "R")}
    rep = CaseReport(params=params, words=words, proxies=hyperbolicity_proxies(sys))
    info = gate(sys, "R")
    rep.positive = info["positive"]
    rep.gate = {"connected": info["connected"], "cut_vertices": list(info["cut_vertices"]), "passes": info["passes"]}
    try:
        rep.graph_type = classify_graph_type(info["graph"])
    except GraphError as e:
        rep.diagnostics.append({"level": "warning", "code": "graph-type", "message": str(e)})
    excluded = bool(rep.proxies)
    if excluded:
        rep.branch = rep.final_branch = "nonhyperbolic-excluded"
    if not info["passes"]:
        if excluded:
            return rep
        trig = reduction_trigger(sys)
        if trig is None:
            rep.diagnostics.append({"level": "error", "code": "gate",
                                    "message": "diagram of R has a cut vertex and no reduction applies"})
            return rep
        if _depth >= MAX_REDUCTIONS:
            rep.diagnostics.append({"level": "error", "code": "reduction", "message": "reduction bound reached"})
            return rep
        try:
            nxt = reduction_step(sys, trig["T"])
        except FamilyError as e:
            rep.diagnostics.append({"level": "error", "code": e.constraint, "message": str(e)})
            return rep
        sub = analyze_case(nxt, _depth + 1)
        rep.reduction = nxt.params["reduction"]
        ab = rep.reduction["ab"]
        if any(x <= y for x, y in zip(ab, ab[1:])):
            rep.diagnostics.append({"level": "error", "code": "reduction",
                                    "message": f"|AB| is not strictly decreasing: {ab}"})
        rep.reduced = sub.as_dict()
        rep.branch = "reduction-applied"
        rep.final_branch = sub.final_branch
        if sub.reduction:
            rep.reduction = sub.reduction
        return rep
    try:
        search = search_waves(sys, "R")
    except WaveError as e:
        if not excluded:
            rep.diagnostics.append({"level": "error", "code": "wave", "message": str(e)})
        return rep
    w = search.chosen
    rep.wave = dict(w.as_dict(), found=len(search.waves), classes=search.classes, reason=search.reason)
    rep.counts = wave_alpha_count(sys, w, "alpha")
    try:
        cands = candidates_for(sys, w)
    except ValueError as e:
        if not excluded:
            rep.diagnostics.append({"level": "error", "code": "surgery", "message": str(e)})
        return rep
    for c in cands:
        d = c.as_dict()
        d["alpha_intersection"] = c.wave_traversals * rep.counts["unsigned"]
        d["alpha_intersection_signed"] = c.wave_traversals * rep.counts["signed"]
        rep.candidates.append(d)
    rep.certificates = _certificates(rep)
    if excluded:
        return rep
    rep.branch = rep.final_branch = _branch(rep.counts, rep.candidates)
    if rep.branch is None:
        rep.diagnostics.append({"level": "error", "code": "unclassified",
                                "message": f"counts {rep.counts} match no branch"})
    return rep


# -- sweeps -------------------------------------------------------------------

_ALPHA_KEYS = ("form", "P", "S", "a", "b")
_R_KEYS = ("figure", "R", "U", "a", "b", "c", "Q", "T", "s")


class GridError(ValueError):
    pass


def _values(spec, key):
    """An integer range: a value, a list of values, or {"min", "max"[, "exclude"]}."""
    if isinstance(spec, dict):
        try:
            lo, hi = int(spec["min"]), int(spec["max"])
        except (KeyError, TypeError, ValueError):
            raise GridError(f"{key}: a range needs integer 'min' and 'max'") from None
        skip = set(spec.get("exclude", ()))
        return [v for v in range(lo, hi + 1) if v not in skip]
    if isinstance(spec, list):
        return list(spec)
    return [spec]


def _block_points(block: dict):
    if not isinstance(block, dict) or "alpha" not in block or "r" not in block:
        raise GridError("each grid block needs 'alpha' and 'r' objects")
    al, r = block["alpha"], block["r"]
    for part, keys in ((al, _ALPHA_KEYS), (r, _R_KEYS)):
        bad = set(part) - set(keys)
        if bad:
            raise GridError(f"unknown grid parameters {sorted(bad)}")
    if "form" not in al or "figure" not in r:
        raise GridError("grid blocks need alpha.form and r.figure")
    figs = _values(r["figure"], "figure")
    for f in figs:
        if f not in FIGURES:
            raise GridError(f"unknown figure {f!r}")
    a_keys = [k for k in _ALPHA_KEYS if k in al]
    r_keys = [k for k in _R_KEYS if k in r]
    a_vals = [_values(al[k], k) for k in a_keys]
    r_vals = [figs if k == "figure" else _values(r[k], k) for k in r_keys]
    for av in itertools.product(*a_vals):
        alpha = AlphaParams(**dict(zip(a_keys, av)))
        for rv in itertools.product(*r_vals):
            yield alpha, RFamilyParams(**dict(zip(r_keys, rv)))


def grid_points(grid) -> list[tuple]:
    """The (alpha, r) parameter points of a grid, in grid order."""
    if not grid:
        return []
    blocks = grid.get("blocks", [grid]) if isinstance(grid, dict) else grid
    if not isinstance(blocks, list):
        raise GridError("'blocks' must be a list")
    return [p for b in blocks for p in _block_points(b)]


def run_point(point) -> tuple[list, dict | None]:
    """Reports for every drawing of one grid point, or the reason it was skipped."""
    alpha, r = point
    where = {"alpha": asdict(alpha), "r": asdict(r)}
    try:
        systems = list(realizations(alpha, r))
    except FamilyError as e:
        return [], dict(where, reason="constraint", constraint=e.constraint)
    if not systems:
        return [], dict(where, reason="unrealizable")
    return [analyze_case(s) for s in systems], None


def _threads() -> int:
    raw = os.environ.get("HANDLEWAVE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        log.warning("ignoring HANDLEWAVE_THREADS=%r; running single-threaded", raw)
        n = 1
    return max(1, n)


@dataclass
class SweepResult:
    reports: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    points: int = 0


def run_sweep(grid, threads: int | None = None) -> SweepResult:
    """Analyze every drawing of every grid point; results are in grid order."""
    points = grid_points(grid)
    threads = _threads() if threads is None else max(1, threads)
    if threads > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            outcomes = list(ex.map(run_point, points, chunksize=max(1, len(points) // (4 * threads))))
    else:
        outcomes = [run_point(p) for p in points]
    res = SweepResult(points=len(points))
    for reps, skip in outcomes:
        res.reports.extend(reps)
        if skip:
            res.skipped.append(skip)
    return res


def sweep(grid, threads: int | None = None) -> list[CaseReport]:
    return run_sweep(grid, threads).reports


def summarize(reports, skipped=()) -> dict:
    """Per-branch tallies (first and final branch) plus diagnostics and skip counts."""
    first, final, problems = {}, {}, 0
    for rep in reports:
        k1, k2 = rep.branch or "unclassified", rep.final_branch or "unclassified"
        first[k1] = first.get(k1, 0) + 1
        final[k2] = final.get(k2, 0) + 1
        problems += any(d["level"] == "error" for d in rep.diagnostics)
    reasons = {}
    for s in skipped:
        key = s.get("constraint") or s["reason"]
        reasons[key] = reasons.get(key, 0) + 1
    return {"record": "summary", "cases": len(reports), "branches": dict(sorted(first.items())),
            "final_branches": dict(sorted(final.items())), "with_errors": problems,
            "skipped": len(skipped), "skipped_by_reason": dict(sorted(reasons.items()))}
