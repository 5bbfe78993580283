"""Shared test utilities: random valid systems and naive reference implementations."""
from __future__ import annotations

import random
from math import gcd

from handlewave.curvesys import InvalidSystem
from handlewave.tori import ArcClass, build

_PARTNER = {"A+": "A-", "A-": "A+", "B+": "B-", "B-": "B+"}


def _primitive(rng: random.Random):
    while True:
        n, m = rng.randint(1, 3), rng.randint(-3, 3)
        if gcd(n, m) == 1:
            return n, m


def _neighbour(v, rng):
    """A vector w with det(v, w) = 1, shifted by a random multiple of v."""
    n, m = v
    # extended Euclid for n*y - m*x = 1
    for x in range(-6, 7):
        for y in range(-6, 7):
            if n * y - m * x == 1:
                k = rng.randint(-1, 1)
                return x + k * n, y + k * m
    raise AssertionError("no Farey neighbour found")


def _torus_classes(rng, total):
    v = _primitive(rng)
    w = _neighbour(v, rng)
    pool = [v, w, (v[0] + w[0], v[1] + w[1])]
    pool = [p if p[0] > 0 or (p[0] == 0 and p[1] > 0) else (-p[0], -p[1]) for p in pool]
    k = rng.randint(1, min(3, total))
    vecs = rng.sample(pool, k)
    cuts = sorted(rng.sample(range(1, total), k - 1))
    weights = [b - a for a, b in zip([0] + cuts, cuts + [total])]
    return [ArcClass(tuple(vec), wt) for vec, wt in zip(vecs, weights)]


def random_system(rng: random.Random):
    """A valid curve system built from random compatible arc classes on the two tori."""
    while True:
        total = rng.randint(1, 5)
        ca, cb = _torus_classes(rng, total), _torus_classes(rng, total)
        twist = rng.randrange(2 * total)
        try:
            sys = build(ca, cb, twist)
        except InvalidSystem:
            continue
        if sys.is_valid:
            return sys


def naive_words(sys) -> dict:
    """Walk every named curve slot by slot using only the raw sizes/edges/twists data."""
    sizes, edges, twists = sys.sizes, list(sys.edges), sys.twists
    out = {}
    for name, start in sys.curves.items():
        p0, q = edges[start]
        letters = []
        k, at = start, q
        while True:
            circle, i = at
            letters.append(circle[0] if circle.endswith("-") else circle[0].lower())
            entry = (_PARTNER[circle], (twists[circle[0]] - i) % sizes[circle])
            k = next(j for j, e in enumerate(edges) if entry in e)
            if k == start and entry == p0:
                break
            e = edges[k]
            at = e[1] if e[0] == entry else e[0]
        out[name] = "".join(letters)
    return out


def naive_reduce(s: str) -> str:
    stack = []
    for x in s:
        if stack and stack[-1] == x.swapcase():
            stack.pop()
        else:
            stack.append(x)
    while len(stack) >= 2 and stack[0] == stack[-1].swapcase():
        stack = stack[1:-1]
    return "".join(stack)


def conjugate(u: str, v: str) -> bool:
    u, v = naive_reduce(u), naive_reduce(v)
    return len(u) == len(v) and (u == v or u in v + v)
