"""The truncated surgery grid of a satellite: E/F/J/M blocks, the length-1 and
length-2 maps between them, absolute gradings, and the reduced output.

All half-integers are doubled: ``s2 = 2s``, ``t2 = 2t``, column ``p2 = s2 - 2A(x)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable

from .bimodule import PatternBimodule, PatternData, build_bimodule
from .chain import (
    ChainError,
    ColumnDiagram,
    ColumnMorphism,
    Entries,
    FreeComplex,
    Generator,
    Morphism,
    _add_entry,
    box_tensor_morphism,
    box_tensor,
    compose,
    identity,
    reduce,
    solve_against,
    validate,
    word_action,
)
from .companion import CompanionData
from .ring import Monomial, RingElement, mono, unit_or_pure

log = logging.getLogger(__name__)

CORNERS = ("E", "F", "J", "M")
U1 = mono(1, 1)


def _U(k: int) -> Monomial:
    return mono(k, k)


class AssemblyError(ChainError):
    """Grid construction failed; the message names the offending block."""


@dataclass(frozen=True, order=True)
class GridIndex:
    corner: str
    s2: int
    t2: int

    def __str__(self) -> str:
        from .ring import half_str

        return f"{self.corner}({half_str(self.s2)},{half_str(self.t2)})"


@dataclass(frozen=True)
class SatelliteParams:
    """Winding number ``l``, companion genus ``g``, framing ``n``, doubled bound ``N2``."""

    l: int
    g: int
    n: int
    N2: int


def truncate(params: SatelliteParams) -> list[GridIndex]:
    """Index set of the truncated grid, sorted by (corner, s, t)."""
    l, g, n, N2 = params.l, params.g, params.n, params.N2
    g2, n2 = 2 * g, 2 * n
    if n >= 0:
        h2 = max(g2, -g2 + n2 + 2)
        bounds = {
            "E": ((-g2, h2), (-N2, N2)),
            "F": ((-g2, h2 - 2), (-N2, N2)),
            "J": ((-g2 + n2, h2), (-N2 - 2, N2)),
            "M": ((-g2 + n2, h2 - 2), (-N2 - 2, N2)),
        }
    else:
        bounds = {
            "E": ((-g2, g2), (-N2, N2)),
            "F": ((-g2 - 2, g2), (-N2, N2)),
            "J": ((-g2 + n2, g2), (-N2, N2 - 2)),
            "M": ((-g2 + n2 - 2, g2), (-N2, N2 - 2)),
        }
    t_par = (l - 1) % 2
    out = []
    for corner in CORNERS:
        (s_lo, s_hi), (t_lo, t_hi) = bounds[corner]
        for s2 in range(s_lo + 1, s_hi):
            if s2 % 2 != 1 and s2 % 2 != -1:
                continue
            for t2 in range(t_lo + 1, t_hi):
                if t2 % 2 == t_par:
                    out.append(GridIndex(corner, s2, t2))
    return sorted(out)


def d_value(s2: int, t2: int, params: SatelliteParams) -> int:
    l, n = params.l, params.n
    num = (1 - (t2 - l) ** 2) * n - 2 * (1 + t2 - l) * (1 + s2) + 4
    if num % 4:
        raise AssemblyError(f"non-integral grading shift at s2={s2}, t2={t2}")
    return num // 4


def grading_shift(corner: str, s2: int, t2: int, params: SatelliteParams) -> tuple[int, int, int]:
    """``(dw, dz, dA2)``: Maslov shifts of the block and its doubled Alexander shift."""
    l, n = params.l, params.n
    d = d_value(s2, t2, params)
    a2 = (s2 + t2 * n) * l
    if corner == "E":
        return d, d + s2 + t2 - a2, a2
    if corner == "F":
        return d - 1, d + s2 - a2 - l, a2
    if corner == "J":
        return d - 1, d + t2 - a2, a2
    if corner == "M":
        return d - 2, d - 2 - a2 - l, a2
    raise AssemblyError(f"unknown corner {corner!r}")


# ---------------------------------------------------------------------------
# rows of the pattern bimodule


class Rows:
    """Column diagrams of the E and F rows at each t, and the per-column maps."""

    def __init__(self, B: PatternBimodule) -> None:
        self.B = B
        self._cache: dict = {}

    def _memo(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def e_col(self, t2: int, p2: int) -> FreeComplex:
        return self.B.C(t2 - 1) if p2 < 0 else self.B.C(t2 + 1)

    def e_row(self, t2: int, literal: bool = False) -> ColumnDiagram:
        return self._memo(("E", t2, literal), lambda: self._e_row(t2, literal))

    def _e_row(self, t2: int, literal: bool) -> ColumnDiagram:
        B = self.B
        lo, hi = B.C(t2 - 1), B.C(t2 + 1)

        def column(p2: int) -> FreeComplex:
            return lo if p2 < 0 else hi

        def shift(p2: int) -> tuple[int, int]:
            return (p2 + 1, 0) if p2 < 0 else (0, -p2 + 1)

        def step_w(p2: int) -> Morphism:
            if p2 <= -1:
                return identity(lo)
            if p2 == 1:
                return B.LW(t2 + 1)
            return identity(hi, U1)

        def step_z(p2: int) -> Morphism:
            if p2 <= -3:
                return identity(lo, U1)
            if p2 == -1:
                return B.LZ(t2 - 1)
            return identity(hi)

        if literal:
            return ColumnDiagram(column, shift, step_w, step_z, name=f"E-literal[{t2}]")
        return ColumnDiagram(column, shift, step_w, step_z,
                             h_wz=lambda p2: B.hWZ(t2 - 1) if p2 == -1 else None,
                             h_zw=lambda p2: B.hZW(t2 + 1) if p2 == 1 else None,
                             r_offset2=0, name=f"E[{t2}]")

    def f_row(self, t2: int) -> ColumnDiagram:
        return self._memo(("F", t2), lambda: self._f_row(t2))

    def _f_row(self, t2: int) -> ColumnDiagram:
        S = self.B.S
        return ColumnDiagram(
            column=lambda p2: S,
            shift=lambda p2: (min(p2 + 1, 0), min(0, -p2 - 1)),
            step_w=lambda p2: identity(S, U1) if p2 >= 1 else identity(S),
            step_z=lambda p2: identity(S, U1) if p2 <= -3 else identity(S),
            r_offset2=self.B.l, name=f"F[{t2}]")

    # maps E(s,t) -> F(s,t) and E(s,t) -> F(s-1,t)
    def mu(self, t2: int) -> ColumnMorphism:
        B = self.B

        def f2(letter: str, p2: int) -> Morphism | None:
            if letter == "Z" and p2 == -1:
                return B.hSigZ(t2 - 1)
            if letter == "W" and p2 == 1:
                return B.hSigW(t2 + 1)
            return None

        return ColumnMorphism(lambda p2: B.Lsigma(t2 - 1 if p2 < 0 else t2 + 1), f2, 0)

    def minus_mu(self, t2: int) -> ColumnMorphism:
        B = self.B

        def f2(letter: str, p2: int) -> Morphism | None:
            if letter == "W" and p2 == 1:
                return B.hTauW(t2 + 1)
            if letter == "Z" and p2 == -1:
                return B.hTauZ(t2 - 1)
            return None

        return ColumnMorphism(lambda p2: B.Ltau(t2 - 1 if p2 < 0 else t2 + 1), f2, -2)

    # companion-direction column maps out of E, into a copy of C_{t+1/2} or C_{t-1/2}
    def sigma_col(self, t2: int, p2: int) -> Morphism:
        if p2 <= -1:
            f = self.B.LZ(t2 - 1)
            k = (-p2 - 1) // 2
            return f.scaled(_U(k)) if k else f
        return identity(self.B.C(t2 + 1))

    def tau_col(self, t2: int, p2: int) -> Morphism:
        if p2 <= -1:
            return identity(self.B.C(t2 - 1))
        f = self.B.LW(t2 + 1)
        k = (p2 - 1) // 2
        return f.scaled(_U(k)) if k else f

    def sigma_f3(self, t2: int, p2: int, a: Monomial) -> Morphism | None:
        c, letter, e = unit_or_pure(a)
        if letter != "W":
            return None
        D = self.e_row(t2)
        total = None
        for j in range(e):
            q = p2 - 2 * (e - 1 - j)
            if q != 1:
                continue
            pre, _ = word_action(D, p2, "W", e - 1 - j)
            term = compose(self.B.hZW(t2 + 1), pre)
            if j:
                term = term.scaled(_U(j))
            total = term if total is None else total + term
        if total is not None and c:
            total = total.scaled(_U(c))
        return total

    def tau_f3(self, t2: int, p2: int, a: Monomial) -> Morphism | None:
        c, letter, e = unit_or_pure(a)
        if letter != "Z":
            return None
        D = self.e_row(t2)
        total = None
        for j in range(e):
            q = p2 + 2 * (e - 1 - j)
            if q != -1:
                continue
            pre, _ = word_action(D, p2, "Z", e - 1 - j)
            term = compose(self.B.hWZ(t2 - 1), pre)
            if j:
                term = term.scaled(_U(j))
            total = term if total is None else total + term
        if total is not None and c:
            total = total.scaled(_U(c))
        return total


# ---------------------------------------------------------------------------
# the grid


@dataclass
class GridMap:
    kind: str
    source: GridIndex
    target: GridIndex
    entries: Entries


@dataclass
class SurgeryGrid:
    params: SatelliteParams
    index: list[GridIndex]
    blocks: dict[GridIndex, FreeComplex]
    maps: list[GridMap]
    complex: FreeComplex
    internal: Entries = field(default_factory=dict)

    def maps_of(self, kind: str) -> list[GridMap]:
        return [m for m in self.maps if m.kind == kind]


def _merge(dst: Entries, src: Entries) -> None:
    for s, row in src.items():
        for t, c in row.items():
            _add_entry(dst, s, t, c)


def _rekey(f: Morphism, src_key: Callable, tgt_key: Callable) -> Entries:
    out: Entries = {}
    for m, row in f.entries.items():
        for m2, c in row.items():
            _add_entry(out, src_key(m), tgt_key(m2), c)
    return out


class GridBuilder:
    """Builds the blocks and maps of the truncated grid for one (P, K, n)."""

    def __init__(self, B: PatternBimodule, K: CompanionData, n: int) -> None:
        self.B = B
        self.K = K
        self.n = n
        self.rows = Rows(B)
        self.params = SatelliteParams(B.l, K.genus, n, B.N2)
        self.index = truncate(self.params)
        self._present = set(self.index)
        self._blocks: dict[GridIndex, FreeComplex] = {}
        lo, hi = B.window
        for idx in self.index:
            for t in (idx.t2 - 1, idx.t2 + 1):
                if not lo <= t <= hi:
                    raise AssemblyError(f"missing staircase column C[{t}/2] for block {idx}")

    # --- blocks

    def internal_block(self, idx: GridIndex, literal: bool = False) -> FreeComplex:
        """Block in its internal gradings (before the absolute shift)."""
        tag = (idx.corner, idx.s2, idx.t2)
        B = self.B
        if idx.corner == "E":
            return box_tensor(self.K.cfk, self.rows.e_row(idx.t2, literal), idx.s2, tag)
        if idx.corner == "F":
            return box_tensor(self.K.cfk, self.rows.f_row(idx.t2), idx.s2, tag)
        col, r_off = (B.C(idx.t2 + 1), 0) if idx.corner == "J" else (B.S, B.l)
        gens = tuple(Generator((tag, "b", m.id), m.grw, m.grz, (m.alex2[-1] + r_off,),
                               block=tag, algdeg=m.algdeg) for m in col.generators)
        diff = {(tag, "b", s): {(tag, "b", t): c for t, c in row.items()} for s, row in col.diff.items()}
        return FreeComplex(gens, diff)

    def build_block(self, idx: GridIndex, literal: bool = False) -> FreeComplex:
        """Block with absolute gradings; Alexander grading checked against the bigrading."""
        key = (idx, literal)
        if key in self._blocks:
            return self._blocks[key]
        inner = self.internal_block(idx, literal)
        dw, dz, da = grading_shift(idx.corner, idx.s2, idx.t2, self.params)
        gens = []
        for g in inner.generators:
            a2 = g.alex2[-1] + da
            h = Generator(g.id, g.grw + dw, g.grz + dz, (a2,), block=g.block, algdeg=g.algdeg)
            if h.grw - h.grz != a2:
                raise AssemblyError(f"block {idx}: Alexander grading {a2}/2 disagrees with "
                                    f"bigrading ({h.grw},{h.grz}) at {g.id!r}")
            gens.append(h)
        out = FreeComplex(tuple(gens), inner.diff)
        # the literal block only squares to zero after its correction is added
        bad = [v for v in validate(out).violations if not (literal and v.startswith("d^2"))]
        if bad:
            raise AssemblyError(f"block {idx}: {bad[0]}")
        self._blocks[key] = out
        return out

    # --- length-1 maps

    def _p2(self, x: Hashable, s2: int) -> int:
        return s2 - self.K.alex2(x)

    def _tgt(self, corner: str, s2: int, t2: int) -> GridIndex | None:
        idx = GridIndex(corner, s2, t2)
        return idx if idx in self._present else None

    def build_phi_length1(self, kind: str, src: GridIndex, corrections: bool = True) -> list[GridMap]:
        """All maps of the given kind out of one block; ``corrections=False``
        keeps only the terms that do not ride on a companion arrow."""
        c, s2, t2 = src.corner, src.s2, src.t2
        if c == "E" and kind in ("mu", "-mu"):
            return self._e_mu(kind, src, corrections)
        if c == "E" and kind in ("K", "-K"):
            return self._e_companion(kind, src, corrections)
        if c == "F" and kind in ("K", "-K"):
            return self._f_companion(kind, src)
        if c == "J" and kind in ("mu", "-mu"):
            tgt = self._tgt("M", s2 if kind == "mu" else s2 - 2, t2)
            if tgt is None:
                return []
            f = self.B.Lsigma(t2 + 1) if kind == "mu" else self.B.Ltau(t2 + 1)
            st, tt = (c, s2, t2), ("M", tgt.s2, tgt.t2)
            return [GridMap(kind, src, tgt, _rekey(f, lambda m: (st, "b", m), lambda m: (tt, "b", m)))]
        return []

    def _e_mu(self, kind: str, src: GridIndex, corrections: bool = True) -> list[GridMap]:
        s2, t2 = src.s2, src.t2
        tgt = self._tgt("F", s2 if kind == "mu" else s2 - 2, t2)
        if tgt is None:
            return []
        f = self.rows.mu(t2) if kind == "mu" else self.rows.minus_mu(t2)
        a, b = self.build_block(src), self.build_block(tgt)
        m = box_tensor_morphism(self.K.cfk, self.rows.e_row(t2), self.rows.f_row(t2), f, s2, tgt.s2,
                                a, b, tags=((src.corner, s2, t2), ("F", tgt.s2, t2)))
        entries = m.entries
        if not corrections:
            entries = {s: {t: c for t, c in row.items() if t[1] == s[1]} for s, row in entries.items()}
        return [GridMap(kind, src, tgt, entries)]

    def _companion_target(self, kind: str, p2: int, k: int, t2: int, corner: str) -> GridIndex | None:
        if kind == "K":
            return self._tgt(corner, p2 + 2 * k + 2, t2)
        return self._tgt(corner, p2 + 2 * (k + self.n) + 2, t2 - 2)

    def _arrows(self, kind: str, x: Hashable):
        return self.K.sigma_from(x) if kind == "K" else self.K.tau_from(x)

    def _e_companion(self, kind: str, src: GridIndex, corrections: bool = True) -> list[GridMap]:
        s2, t2 = src.s2, src.t2
        st = ("E", s2, t2)
        out: dict[GridIndex, Entries] = {}

        def put(tgt: GridIndex, x: Hashable, f: Morphism) -> None:
            tt = ("J", tgt.s2, tgt.t2)
            _merge(out.setdefault(tgt, {}), _rekey(f, lambda m: (st, x, m), lambda m: (tt, "b", m)))

        col = self.rows.sigma_col if kind == "K" else self.rows.tau_col
        f3 = self.rows.sigma_f3 if kind == "K" else self.rows.tau_f3
        for x in self.K.cfk.generators:
            p2 = self._p2(x.id, s2)
            for arr in self._arrows(kind, x.id):
                tgt = self._companion_target(kind, p2, arr.t, t2, "J")
                if tgt is not None:
                    f = col(t2, p2)
                    put(tgt, x.id, f.scaled(_U(arr.u)) if arr.u else f)
            if not corrections:
                continue
            for x1, coef in self.K.cfk.d(x.id).items():
                p1 = self._p2(x1, s2)
                for a in coef.terms:
                    g = f3(t2, p2, a)
                    if g is None:
                        continue
                    for arr in self._arrows(kind, x1):
                        tgt = self._companion_target(kind, p1, arr.t, t2, "J")
                        if tgt is not None:
                            put(tgt, x.id, g.scaled(_U(arr.u)) if arr.u else g)
        return [GridMap(kind, src, t, e) for t, e in sorted(out.items()) if e]

    def _f_companion(self, kind: str, src: GridIndex) -> list[GridMap]:
        s2, t2 = src.s2, src.t2
        st = ("F", s2, t2)
        out: dict[GridIndex, Entries] = {}
        S = self.B.S
        for x in self.K.cfk.generators:
            p2 = self._p2(x.id, s2)
            extra = max(0, (-p2 - 1) // 2) if kind == "K" else max(0, (p2 + 1) // 2)
            for arr in self._arrows(kind, x.id):
                tgt = self._companion_target(kind, p2, arr.t, t2, "M")
                if tgt is None:
                    continue
                tt = ("M", tgt.s2, tgt.t2)
                coef = RingElement.of(_U(arr.u + extra))
                row = out.setdefault(tgt, {})
                for m in S.generators:
                    _add_entry(row, (st, x.id, m.id), (tt, "b", m.id), coef)
        return [GridMap(kind, src, t, e) for t, e in sorted(out.items()) if e]

    # --- length-2 maps

    def build_phi_length2(self, src: GridIndex) -> list[GridMap]:
        """Diagonal maps E(s,t) -> M out of one E block, from the column data."""
        if src.corner != "E":
            return []
        s2, t2 = src.s2, src.t2
        B = self.B
        st = ("E", s2, t2)
        out: dict[tuple[str, GridIndex], Entries] = {}

        def put(kind: str, tgt: GridIndex | None, x: Hashable, f: Morphism, k: int) -> None:
            if tgt is None:
                return
            f = f.scaled(_U(k)) if k else f
            tt = ("M", tgt.s2, tgt.t2)
            _merge(out.setdefault((kind, tgt), {}), _rekey(f, lambda m: (st, x, m), lambda m: (tt, "b", m)))

        for x in self.K.cfk.generators:
            p2 = self._p2(x.id, s2)
            if p2 <= -1:
                for arr in self.K.sigma_from(x.id):
                    s_new = p2 + 2 * arr.t + 2
                    k = arr.u + (-p2 - 1) // 2
                    put("K,mu", self._tgt("M", s_new, t2), x.id, B.hSigZ(t2 - 1), k)
                    put("K,-mu", self._tgt("M", s_new - 2, t2), x.id, B.hTauZ(t2 - 1), k)
            else:
                for arr in self.K.tau_from(x.id):
                    s_new = p2 + 2 * (arr.t + self.n) + 2
                    k = arr.u + (p2 - 1) // 2
                    put("-K,mu", self._tgt("M", s_new, t2 - 2), x.id, B.hSigW(t2 + 1), k)
                    put("-K,-mu", self._tgt("M", s_new - 2, t2 - 2), x.id, B.hTauW(t2 + 1), k)
        return [GridMap(kind, src, t, e) for (kind, t), e in sorted(out.items()) if e]

    # --- whole grid

    def build(self) -> SurgeryGrid:
        blocks = {idx: self.build_block(idx) for idx in self.index}
        maps: list[GridMap] = []
        for idx in self.index:
            for kind in ("mu", "-mu", "K", "-K"):
                maps.extend(self.build_phi_length1(kind, idx))
            maps.extend(self.build_phi_length2(idx))
        return _finish(self.params, self.index, blocks, maps)


def _finish(params: SatelliteParams, index: list[GridIndex], blocks: dict[GridIndex, FreeComplex],
            maps: list[GridMap]) -> SurgeryGrid:
    gens: list[Generator] = []
    internal: Entries = {}
    for idx in index:
        gens.extend(blocks[idx].generators)
        _merge(internal, blocks[idx].diff)
    diff: Entries = {}
    _merge(diff, internal)
    for m in maps:
        _merge(diff, m.entries)
    total = FreeComplex(tuple(gens), diff)
    rep = validate(total)
    if not rep.ok:
        bad = rep.violations[0]
        raise AssemblyError(f"grid differential invalid: {bad}")
    return SurgeryGrid(params, index, blocks, maps, total, internal)


def build_grid(P: PatternData | PatternBimodule, K: CompanionData, n: int,
               mode: str = "columns") -> SurgeryGrid:
    """Build the truncated grid. ``mode="solver"`` is the independent assembly
    that solves for every correction term instead of reading it off the columns."""
    B = P if isinstance(P, PatternBimodule) else bimodule_for(P, K, n)
    builder = GridBuilder(B, K, n)
    if mode == "columns":
        return builder.build()
    if mode == "solver":
        return solver_grid(builder)
    raise AssemblyError(f"unknown mode {mode!r}")


def bimodule_for(P: PatternData, K: CompanionData, n: int) -> PatternBimodule:
    """A bimodule whose window covers every column the grid will touch."""
    reach = P.N2 + 2 * (K.genus + abs(n) + 4) + 2 * max((abs(a.t) for a in K.sigma + K.tau_base), default=0)
    return build_bimodule(P, K.genus, (-reach, reach))


def assemble_and_reduce(P: PatternData | PatternBimodule, K: CompanionData, n: int, *,
                        reduce_output: bool = True, mode: str = "columns") -> FreeComplex:
    """Reduced knot complex of the satellite P(K, n)."""
    grid = build_grid(P, K, n, mode)
    log.info("grid: %d blocks, %d generators, %d arrows", len(grid.index), len(grid.complex),
             grid.complex.num_arrows())
    if not reduce_output:
        return grid.complex
    return reduce(grid.complex, track=False).complex


# ---------------------------------------------------------------------------
# independent assembly: corrections solved from the defining equations


def _arrow_targets(K: CompanionData, x: Hashable, steps: int) -> set:
    frontier = {x}
    for _ in range(steps):
        frontier = {y for z in frontier for y in K.cfk.d(z)}
    return frontier


def _x_of(g: Generator) -> Hashable:
    return g.id[1]


def solver_grid(builder: GridBuilder) -> SurgeryGrid:
    """Only generator-wise column data is taken from the rows; every term that
    rides on a companion arrow is solved for.

    E blocks start from the literal composite of the letter steps and get a
    degree-(-1,-1) correction K with dK + Kd = d^2 along two-arrow paths; the
    length-1 maps get corrections along one-arrow paths; the length-2 maps solve
    the remaining defect of the square.
    """
    K = builder.K
    index = builder.index
    blocks: dict[GridIndex, FreeComplex] = {}
    for idx in index:
        if idx.corner != "E":
            blocks[idx] = builder.build_block(idx)
            continue
        lit = builder.build_block(idx, literal=True)
        d0 = lit.diff
        sq = _square(d0)
        two = {x.id: _arrow_targets(K, x.id, 2) for x in K.cfk.generators}

        def allow2(a: Generator, b: Generator, two=two) -> bool:
            return _x_of(b) in two[_x_of(a)] and b.algdeg == a.algdeg + 1

        corr = solve_against(lit, lit, d0, d0, sq, (-1, -1), allow2) if sq else {}
        diff: Entries = {}
        _merge(diff, d0)
        _merge(diff, corr)
        blk = FreeComplex(lit.generators, diff)
        rep = validate(blk)
        if not rep.ok:
            raise AssemblyError(f"solver block {idx}: {rep.violations[0]}")
        blocks[idx] = blk

    # generator-wise parts of the length-1 maps
    maps0: list[GridMap] = []
    for idx in index:
        for kind in ("mu", "-mu", "K", "-K"):
            maps0.extend(builder.build_phi_length1(kind, idx, corrections=False))

    gens: list[Generator] = [g for idx in index for g in blocks[idx].generators]
    grid = FreeComplex(tuple(gens), {})
    internal: Entries = {}
    for idx in index:
        _merge(internal, blocks[idx].diff)
    phi0: Entries = {}
    for gm in maps0:
        _merge(phi0, gm.entries)

    # one-arrow corrections of the length-1 maps
    one = {x.id: _arrow_targets(K, x.id, 1) for x in K.cfk.generators}
    length1 = {("E", "F"), ("E", "J"), ("F", "M"), ("J", "M")}

    def allow1(a: Generator, b: Generator) -> bool:
        if (a.block[0], b.block[0]) not in length1 or b.algdeg != a.algdeg + 1:
            return False
        if a.block[0] == "J":
            return False
        if b.block[0] == "F":
            return _x_of(b) in one[_x_of(a)]
        return bool(one[_x_of(a)])

    rhs = _anticommutator(internal, phi0)
    phi1 = solve_against(grid, grid, internal, internal, rhs, (-1, -1), allow1) if rhs else {}
    phi: Entries = {}
    _merge(phi, phi0)
    _merge(phi, phi1)

    # length-2 maps E -> M bound the square of the length-1 maps
    def allow_em(a: Generator, b: Generator) -> bool:
        return (a.block[0], b.block[0]) == ("E", "M") and b.algdeg == a.algdeg + 1

    defect = _square(phi)
    g2 = solve_against(grid, grid, internal, internal, defect, (-1, -1), allow_em) if defect else {}

    maps: list[GridMap] = []
    for name, table in (("length1", phi), ("length2", g2)):
        by_pair: dict[tuple, Entries] = {}
        for s, row in table.items():
            for t, c in row.items():
                _add_entry(by_pair.setdefault((s[0], t[0]), {}), s, t, c)
        for (sb, tb), e in sorted(by_pair.items()):
            maps.append(GridMap(name, GridIndex(*sb), GridIndex(*tb), e))
    return _finish(builder.params, index, blocks, maps)


def _square(d: Entries) -> Entries:
    out: Entries = {}
    for a, row in d.items():
        for b, c in row.items():
            for e, c2 in d.get(b, {}).items():
                _add_entry(out, a, e, c * c2)
    return out


def _anticommutator(d: Entries, f: Entries) -> Entries:
    """``d f + f d`` (composition order is irrelevant for the table layout)."""
    out: Entries = {}
    for a, row in f.items():
        for b, c in row.items():
            for e, c2 in d.get(b, {}).items():
                _add_entry(out, a, e, c * c2)
    for a, row in d.items():
        for b, c in row.items():
            for e, c2 in f.get(b, {}).items():
                _add_entry(out, a, e, c * c2)
    return out


def _restrict(table: Entries, keep: Callable[[Hashable, Hashable], bool]) -> Entries:
    return {s: {t: c for t, c in row.items() if keep(s, t)} for s, row in table.items()
            if any(keep(s, t) for t in row)}


__all__ = [
    "AssemblyError",
    "GridBuilder",
    "GridIndex",
    "GridMap",
    "Rows",
    "SatelliteParams",
    "SurgeryGrid",
    "assemble_and_reduce",
    "bimodule_for",
    "build_grid",
    "d_value",
    "grading_shift",
    "solver_grid",
    "truncate",
]
