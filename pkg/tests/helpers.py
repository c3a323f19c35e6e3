"""Shared builders for the test suite."""

from __future__ import annotations

import random
from typing import Hashable

from satcfk.assembly import assemble_and_reduce
from satcfk.bimodule import builtin_pattern
from satcfk.chain import FreeComplex, Generator
from satcfk.companion import builtin_companion
from satcfk.gradings import complex_from_graph
from satcfk.ring import RingElement, parse_element

_CACHE: dict = {}


def satellite(pattern: str, companion: str, n: int, **params) -> FreeComplex:
    key = (pattern, tuple(sorted(params.items())), companion, n)
    if key not in _CACHE:
        _CACHE[key] = assemble_and_reduce(builtin_pattern(pattern, **params), builtin_companion(companion), n)
    return _CACHE[key]


def complex_of(gens: list[tuple[Hashable, int, int]], arrows: list[tuple[Hashable, Hashable, str]],
               algdeg: dict | None = None) -> FreeComplex:
    algdeg = algdeg or {}
    diff: dict = {}
    for s, t, c in arrows:
        diff.setdefault(s, {})[t] = parse_element(c, 0)
    return FreeComplex(tuple(Generator(g, w, z, (w - z,), algdeg=algdeg.get(g)) for g, w, z in gens), diff)


def rht() -> FreeComplex:
    return complex_of([("a", -1, -1), ("b", -2, 0), ("c", 0, -2)], [("a", "b", "Z"), ("a", "c", "W")])


def staircase_graph(steps: list[int]) -> FreeComplex:
    """Staircase with the given step lengths, placed by the tower-top rule."""
    verts = [f"v{i}" for i in range(len(steps) + 1)]
    arrows = []
    for k in range(0, len(steps), 2):
        y = verts[k + 1]
        arrows.append((y, verts[k], f"W^{steps[k]}"))
        arrows.append((y, verts[k + 2], f"Z^{steps[k + 1]}"))
    C = complex_from_graph(verts, arrows)
    gens = tuple(g.shifted(0, 0, algdeg=int(g.id[1:]) % 2) for g in C.generators)
    return FreeComplex(gens, C.diff)


def elementary_change(C: FreeComplex, i: Hashable, j: Hashable) -> FreeComplex:
    """The same complex in the basis with e_j replaced by e_j + e_i (equal gradings)."""
    rows = {g: dict(C.d(g)) for g in C.ids()}
    for t, c in rows[i].items():
        rows[j][t] = rows[j].get(t, RingElement()) + c
    for row in rows.values():
        if j in row:
            row[i] = row.get(i, RingElement()) + row[j]
    return FreeComplex(C.generators, rows)


def shuffled(C: FreeComplex, seed: int) -> FreeComplex:
    rng = random.Random(seed)
    gens = list(C.generators)
    rng.shuffle(gens)
    names = {g.id: f"g{k}" for k, g in enumerate(rng.sample(gens, len(gens)))}
    new = tuple(Generator(names[g.id], g.grw, g.grz, g.alex2, g.block, g.algdeg) for g in gens)
    diff = {names[s]: {names[t]: c for t, c in row.items()} for s, row in C.diff.items()}
    return FreeComplex(new, diff)


def dual(C: FreeComplex) -> FreeComplex:
    """Mirror-knot complex: arrows reversed, all gradings negated."""
    gens = tuple(Generator(g.id, -g.grw, -g.grz, tuple(-a for a in g.alex2)) for g in C.generators)
    diff: dict = {}
    for s, t, c in C.arrows():
        diff.setdefault(t, {})[s] = c
    return FreeComplex(gens, diff)
