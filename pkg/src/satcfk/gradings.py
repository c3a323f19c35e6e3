"""Absolute grading normalization: tower tops and complexes from bare arrow graphs."""

from __future__ import annotations

from collections import deque
from typing import Hashable, Iterable

from .chain import ChainError, FreeComplex, Generator
from .ring import RingElement, parse_monomial


def tower_top(C: FreeComplex, letter: str = "W") -> int:
    """Grading of the free generator of H(C) with the other variable set to one.

    Entries become single powers of ``letter``; pairs are split off as torsion
    summands by always eliminating an entry of least exponent.
    """
    idx = 0 if letter == "W" else 1
    # rows: source -> {target: exponent}
    rows: dict[Hashable, dict[Hashable, int]] = {g.id: {} for g in C.generators}
    for s, t, c in C.arrows():
        acc: dict[int, int] = {}
        for m in c.terms:
            e = m.a if idx == 0 else m.b
            acc[e] = acc.get(e, 0) ^ 1
        live = [e for e, v in acc.items() if v]
        if len(live) > 1:  # pragma: no cover - excluded by homogeneity
            raise ChainError("inhomogeneous entry")
        if live:
            rows[s][t] = live[0]
    alive = set(rows)
    while True:
        best = None
        for s in sorted(alive, key=repr):
            for t, e in rows[s].items():
                if best is None or e < best[0]:
                    best = (e, repr(s), repr(t), s, t)
        if best is None:
            break
        k, _, _, x, y = best
        # clear the y-column using x
        for s in list(alive):
            if s == x or y not in rows[s]:
                continue
            shift = rows[s][y] - k
            for t, e in rows[x].items():
                e2 = e + shift
                if t in rows[s] and rows[s][t] == e2:
                    del rows[s][t]
                elif t in rows[s]:  # pragma: no cover - homogeneity forbids this
                    raise ChainError("inhomogeneous elimination")
                else:
                    rows[s][t] = e2
        # y becomes d(x)/letter^k; nothing else references it, so drop the pair
        alive -= {x, y}
        for s in alive:
            rows[s].pop(x, None)
            rows[s].pop(y, None)
        del rows[x]
        del rows[y]
    free = [C.gen(g) for g in alive]
    if len(free) != 1:
        raise ChainError(f"expected one free generator, found {len(free)}")
    return free[0].grw if idx == 0 else free[0].grz


def is_normalized(C: FreeComplex) -> bool:
    return tower_top(C, "W") == 0 and tower_top(C, "Z") == 0


def complex_from_graph(vertices: Iterable[Hashable], arrows: Iterable[tuple[Hashable, Hashable, str]],
                       anchor: dict[Hashable, tuple[int, int]] | None = None) -> FreeComplex:
    """Free complex from arrows ``(source, target, "W^a Z^b")``.

    Relative gradings follow from the arrows; each connected component is
    placed by ``anchor`` if given there, otherwise the whole complex is
    shifted so both tower tops sit at zero.
    """
    verts = list(vertices)
    arr = [(s, t, parse_monomial(c, 0)) for s, t, c in arrows]
    adj: dict[Hashable, list[tuple[Hashable, int, int]]] = {v: [] for v in verts}
    for s, t, m in arr:
        dw, dz = -1 + 2 * m.a, -1 + 2 * m.b
        adj[s].append((t, dw, dz))
        adj[t].append((s, -dw, -dz))
    gr: dict[Hashable, tuple[int, int]] = {}
    comps: list[list[Hashable]] = []
    for v in verts:
        if v in gr:
            continue
        gr[v] = (0, 0)
        comp = [v]
        queue = deque([v])
        while queue:
            u = queue.popleft()
            for w, dw, dz in adj[u]:
                want = (gr[u][0] + dw, gr[u][1] + dz)
                if w in gr:
                    if gr[w] != want:
                        raise ChainError(f"inconsistent gradings at {w!r}")
                    continue
                gr[w] = want
                comp.append(w)
                queue.append(w)
        comps.append(comp)
    anchor = anchor or {}
    floating = []
    for comp in comps:
        pinned = [v for v in comp if v in anchor]
        if pinned:
            v = pinned[0]
            dw, dz = anchor[v][0] - gr[v][0], anchor[v][1] - gr[v][1]
            for u in comp:
                gr[u] = (gr[u][0] + dw, gr[u][1] + dz)
        else:
            floating.extend(comp)
    diff: dict = {}
    for s, t, m in arr:
        row = diff.setdefault(s, {})
        row[t] = row[t] + RingElement.of(m) if t in row else RingElement.of(m)

    def build() -> FreeComplex:
        return FreeComplex(tuple(Generator(v, gr[v][0], gr[v][1], (gr[v][0] - gr[v][1],)) for v in verts), diff)

    if floating:
        C = build()
        tw, tz = tower_top(C, "W"), tower_top(C, "Z")
        for u in floating:
            gr[u] = (gr[u][0] - tw, gr[u][1] - tz)
    return build()
