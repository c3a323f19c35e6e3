"""Free bigraded complexes over F[W,Z], morphisms between them, and the
algorithms acting on them: validation, cancellation, chain-map lifting,
null-homotopy solving, column-diagram tensoring and isomorphism testing.

Conventions
-----------
* A differential or morphism entry ``x -> y`` with coefficient ``c`` means
  ``f(x) = ... + y (x) c``.
* A morphism of degree ``delta`` satisfies ``gr(y) + gr(c) = gr(x) + delta``
  termwise; a differential has degree ``(-1, -1)``.
* Ring variables move only the last Alexander coordinate of a generator.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping

from .ring import (
    ONE,
    Bigrading,
    Monomial,
    RingElement,
    monomial_for_grading,
    mono,
    unit_or_pure,
)

log = logging.getLogger(__name__)

Entries = dict[Hashable, dict[Hashable, RingElement]]


class ChainError(RuntimeError):
    """Raised when an algebraic precondition fails (no map, unsolvable system)."""


@dataclass(frozen=True)
class Generator:
    id: Hashable
    grw: int
    grz: int
    alex2: tuple[int, ...] = ()
    block: tuple | None = None
    algdeg: int | None = None

    @property
    def gr(self) -> Bigrading:
        return Bigrading(self.grw, self.grz)

    def shifted(self, dw: int, dz: int, **changes) -> Generator:
        base = dict(id=self.id, grw=self.grw + dw, grz=self.grz + dz, alex2=self.alex2,
                    block=self.block, algdeg=self.algdeg)
        base.update(changes)
        return Generator(**base)


def _add_entry(table: Entries, src: Hashable, tgt: Hashable, coef: RingElement) -> None:
    if not coef:
        return
    row = table.setdefault(src, {})
    new = row.get(tgt, RingElement((), coef.idem)) + coef
    if new:
        row[tgt] = new
    else:
        del row[tgt]
        if not row:
            del table[src]


def _clean(table: Mapping[Hashable, Mapping[Hashable, RingElement]]) -> Entries:
    out: Entries = {}
    for src, row in table.items():
        for tgt, coef in row.items():
            _add_entry(out, src, tgt, coef)
    return out


@dataclass
class FreeComplex:
    """Finitely generated free complex; treat instances as immutable values."""

    generators: tuple[Generator, ...]
    diff: Entries = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.generators = tuple(self.generators)
        self.diff = _clean(self.diff)
        self._index = {g.id: i for i, g in enumerate(self.generators)}
        if len(self._index) != len(self.generators):
            raise ChainError("duplicate generator ids")
        for src, row in self.diff.items():
            if src not in self._index or any(t not in self._index for t in row):
                raise ChainError(f"differential references unknown generator near {src!r}")

    def __len__(self) -> int:
        return len(self.generators)

    def gen(self, gid: Hashable) -> Generator:
        return self.generators[self._index[gid]]

    def position(self, gid: Hashable) -> int:
        return self._index[gid]

    def __contains__(self, gid: object) -> bool:
        return gid in self._index

    def d(self, gid: Hashable) -> dict[Hashable, RingElement]:
        return self.diff.get(gid, {})

    def ids(self) -> list[Hashable]:
        return [g.id for g in self.generators]

    def arrows(self) -> Iterable[tuple[Hashable, Hashable, RingElement]]:
        for g in self.generators:
            row = self.diff.get(g.id, {})
            for t in sorted(row, key=self.position):
                yield g.id, t, row[t]

    def predecessors(self) -> dict[Hashable, dict[Hashable, RingElement]]:
        pred: Entries = {}
        for src, row in self.diff.items():
            for tgt, coef in row.items():
                pred.setdefault(tgt, {})[src] = coef
        return pred

    def num_arrows(self) -> int:
        return sum(len(row) for row in self.diff.values())

    def weights(self) -> list[RingElement]:
        return [c for _, _, c in self.arrows()]


@dataclass
class Morphism:
    source: FreeComplex
    target: FreeComplex
    entries: Entries
    degree: Bigrading

    def __post_init__(self) -> None:
        self.entries = _clean(self.entries)
        self.degree = Bigrading(*self.degree)

    def image(self, gid: Hashable) -> dict[Hashable, RingElement]:
        return self.entries.get(gid, {})

    def is_zero(self) -> bool:
        return not self.entries

    def __add__(self, other: Morphism) -> Morphism:
        out: Entries = {}
        for table in (self.entries, other.entries):
            for s, row in table.items():
                for t, c in row.items():
                    _add_entry(out, s, t, c)
        degree = self.degree if self.entries or not other.entries else other.degree
        return Morphism(self.source, self.target, out, degree)

    def scaled(self, m: Monomial) -> Morphism:
        out = {s: {t: c * m for t, c in row.items()} for s, row in self.entries.items()}
        g = m.bigrading
        return Morphism(self.source, self.target, out, self.degree + g)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Morphism):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self) -> int:  # pragma: no cover - morphisms are not used as keys
        return id(self)


Homotopy = Morphism


def compose(g: Morphism, f: Morphism) -> Morphism:
    """``g o f`` (f acts first)."""
    out: Entries = {}
    for x, row in f.entries.items():
        for y, c in row.items():
            for z, c2 in g.image(y).items():
                _add_entry(out, x, z, c * c2)
    return Morphism(f.source, g.target, out, f.degree + g.degree)


def compose_all(*maps: Morphism) -> Morphism:
    """Compose right-to-left: ``compose_all(h, g, f) = h o g o f``."""
    result = maps[-1]
    for m in reversed(maps[:-1]):
        result = compose(m, result)
    return result


def identity(C: FreeComplex, coef: Monomial = ONE) -> Morphism:
    return Morphism(C, C, {g.id: {g.id: RingElement.of(coef)} for g in C.generators}, coef.bigrading)


def zero_map(A: FreeComplex, B: FreeComplex, degree: tuple[int, int]) -> Morphism:
    return Morphism(A, B, {}, Bigrading(*degree))


def differential_map(C: FreeComplex) -> Morphism:
    return Morphism(C, C, C.diff, Bigrading(-1, -1))


def boundary(H: Morphism) -> Morphism:
    """``d o H + H o d``."""
    dA = differential_map(H.source)
    dB = differential_map(H.target)
    out = compose(dB, H) + compose(H, dA)
    out.degree = H.degree + (-1, -1)
    return out


def is_chain_map(f: Morphism) -> bool:
    return boundary(f).is_zero()


@dataclass
class ValidationReport:
    ok: bool
    violations: list[str]

    def __bool__(self) -> bool:
        return self.ok


def _entry_violations(src: Generator, tgt: Generator, coef: RingElement, degree: Bigrading,
                      check_alex: bool) -> list[str]:
    out = []
    for m in coef:
        if m.idem != 0:
            out.append(f"{src.id!r}->{tgt.id!r}: idempotent-1 coefficient {m}")
            continue
        if tgt.gr + m.bigrading != src.gr + degree:
            out.append(f"grading: {src.id!r}->{tgt.id!r} weight {m}")
        if check_alex and src.alex2 and tgt.alex2:
            if (src.alex2[:-1] != tgt.alex2[:-1]
                    or src.alex2[-1] != tgt.alex2[-1] + 2 * m.alex):
                out.append(f"alexander: {src.id!r}->{tgt.id!r} weight {m}")
    return out


def validate(C: FreeComplex) -> ValidationReport:
    """Check d^2 = 0 and termwise homogeneity of every differential entry."""
    bad: list[str] = []
    for s, t, c in C.arrows():
        bad.extend(_entry_violations(C.gen(s), C.gen(t), c, Bigrading(-1, -1), True))
    d = differential_map(C)
    sq = compose(d, d)
    for s, row in sq.entries.items():
        for t, c in row.items():
            bad.append(f"d^2: {s!r}->{t!r} = {c}")
    return ValidationReport(not bad, bad)


def validate_morphism(f: Morphism) -> ValidationReport:
    bad: list[str] = []
    for s, row in f.entries.items():
        for t, c in row.items():
            bad.extend(_entry_violations(f.source.gen(s), f.target.gen(t), c, f.degree, False))
    return ValidationReport(not bad, bad)


# ---------------------------------------------------------------------------
# GF(2) linear algebra


class GF2System:
    """Incremental GF(2) linear system. Rows are int bitmasks; bit 0 is the
    right-hand side and variable ``i`` lives at bit ``i + 1``.

    Pivots are taken on the highest set bit, so back-substitution with free
    variables set to zero yields the lexicographically least solution with
    variable 0 most significant.
    """

    def __init__(self, nvars: int) -> None:
        self.nvars = nvars
        self.pivots: dict[int, int] = {}
        self.consistent = True

    def add(self, row: int) -> None:
        while row > 1:
            hb = row.bit_length() - 1
            p = self.pivots.get(hb)
            if p is None:
                self.pivots[hb] = row
                return
            row ^= p
        if row == 1:
            self.consistent = False

    def solve(self) -> list[int] | None:
        if not self.consistent:
            return None
        values = [0] * self.nvars
        for hb in sorted(self.pivots):
            row = self.pivots[hb]
            v = row & 1
            rest = (row >> 1) & ~(1 << (hb - 1))
            while rest:
                low = rest & -rest
                i = low.bit_length() - 1
                v ^= values[i]
                rest ^= low
            values[hb - 1] = v
        return values

    def nullspace(self) -> list[list[int]]:
        """Basis of the homogeneous solution space (rhs ignored)."""
        free = [i for i in range(self.nvars) if (i + 1) not in self.pivots]
        basis = []
        for f in free:
            values = [0] * self.nvars
            values[f] = 1
            for hb in sorted(self.pivots):
                row = self.pivots[hb] >> 1
                rest = row & ~(1 << (hb - 1))
                v = 0
                while rest:
                    low = rest & -rest
                    v ^= values[low.bit_length() - 1]
                    rest ^= low
                values[hb - 1] = v
            basis.append(values)
        return basis


Unknown = tuple[Hashable, Hashable, Monomial]


def _admissible_unknowns(src: FreeComplex, tgt: FreeComplex, degree: Bigrading,
                         allow: Callable[[Generator, Generator], bool] | None) -> list[Unknown]:
    out = []
    for a in src.generators:
        want = a.gr + degree
        for b in tgt.generators:
            m = monomial_for_grading(0, want - b.gr)
            if m is None:
                continue
            if allow is not None and not allow(a, b):
                continue
            out.append((a.id, b.id, m))
    return out


def _homotopy_system(unknowns: list[Unknown], d_src: Entries, d_tgt: Entries,
                     src_pred: Entries) -> dict[tuple, int]:
    """Equation bitmask per (source, target, monomial) for ``d H + H d``."""
    eqs: dict[tuple, int] = {}
    for k, (a, b, m) in enumerate(unknowns):
        bit = 1 << (k + 1)
        for c, coef in d_tgt.get(b, {}).items():
            for t in coef.terms:
                key = (a, c, m * t)
                eqs[key] = eqs.get(key, 0) ^ bit
        for a2, coef in src_pred.get(a, {}).items():
            for t in coef.terms:
                key = (a2, b, m * t)
                eqs[key] = eqs.get(key, 0) ^ bit
    return eqs


def _solve_homotopy(src: FreeComplex, tgt: FreeComplex, d_src: Entries, d_tgt: Entries,
                    rhs: Entries, degree: Bigrading,
                    allow: Callable[[Generator, Generator], bool] | None) -> Entries | None:
    unknowns = _admissible_unknowns(src, tgt, degree, allow)
    pred: Entries = {}
    for s, row in d_src.items():
        for t, c in row.items():
            pred.setdefault(t, {})[s] = c
    eqs = _homotopy_system(unknowns, d_src, d_tgt, pred)
    for s, row in rhs.items():
        for t, c in row.items():
            for m in c.terms:
                key = (s, t, m)
                eqs[key] = eqs.get(key, 0) ^ 1
    system = GF2System(len(unknowns))
    for key in sorted(eqs, key=repr):
        system.add(eqs[key])
    values = system.solve()
    if values is None:
        return None
    out: Entries = {}
    for v, (a, b, m) in zip(values, unknowns):
        if v:
            _add_entry(out, a, b, RingElement.of(m))
    return out


def _staircase_step(a: Generator, b: Generator) -> bool:
    if a.algdeg is None or b.algdeg is None:
        return True
    return b.algdeg == a.algdeg + 1


def solve_null_homotopy(F: Morphism, *, allow: Callable[[Generator, Generator], bool] | None = None,
                        degree: tuple[int, int] | None = None) -> Morphism:
    """Find ``H`` with ``d H + H d = F``; the lexicographically least solution.

    When both sides carry algebraic gradings, ``H`` raises them by one.
    """
    deg = Bigrading(*(degree if degree is not None else F.degree + (1, 1)))
    rule = allow if allow is not None else _staircase_step
    sol = _solve_homotopy(F.source, F.target, F.source.diff, F.target.diff, F.entries, deg, rule)
    if sol is None:
        raise ChainError("inconsistent system: map is not null-homotopic")
    return Morphism(F.source, F.target, sol, deg)


def solve_against(src: FreeComplex, tgt: FreeComplex, d_src: Entries, d_tgt: Entries,
                  rhs: Entries, degree: tuple[int, int],
                  allow: Callable[[Generator, Generator], bool] | None = None) -> Entries:
    """Solve ``d_tgt H + H d_src = rhs`` for arbitrary (not necessarily square-zero) maps."""
    sol = _solve_homotopy(src, tgt, d_src, d_tgt, _clean(rhs), Bigrading(*degree), allow)
    if sol is None:
        raise ChainError("inconsistent system")
    return sol


def lift_chain_map(A: FreeComplex, B: FreeComplex, shift: tuple[int, int]) -> Morphism:
    """The chain map between staircases of the given degree, nonzero on homology.

    Each cycle of ``A`` goes to the first cycle of ``B`` admitting a monomial of
    the right bigrading; the remaining entries solve the chain-map equation.
    """
    shift = Bigrading(*shift)
    if shift.gr_w % 2 or shift.gr_z % 2:
        raise ChainError("shift must have even coordinates")
    base: Entries = {}
    for a in A.generators:
        if a.algdeg != 0:
            continue
        for b in B.generators:
            if b.algdeg != 0:
                continue
            m = monomial_for_grading(0, a.gr + shift - b.gr)
            if m is not None:
                base[a.id] = {b.id: RingElement.of(m)}
                break
        else:
            raise ChainError(f"no such map: cycle {a.id!r} has no image of degree {tuple(shift)}")
    f0 = Morphism(A, B, base, shift)
    # y-entries: solve d_B Y + Y d_A = d_B f0 + f0 d_A with Y preserving algdeg
    defect = boundary(f0)
    same = lambda a, b: a.algdeg == b.algdeg == 1  # noqa: E731
    sol = _solve_homotopy(A, B, A.diff, B.diff, defect.entries, shift, same)
    if sol is None:
        raise ChainError("no such map: cycle images do not extend")
    f = f0 + Morphism(A, B, sol, shift)
    if not is_chain_map(f):  # pragma: no cover - guarded by the solver
        raise ChainError("lift is not a chain map")
    return f


def cone(f: Morphism) -> FreeComplex:
    """Mapping cone ``A -> B``; generators of A are regraded so f drops by (1,1)."""
    dw, dz = f.degree + (1, 1)
    gens = []
    for a in f.source.generators:
        gw, gz = a.grw + dw, a.grz + dz
        gens.append(Generator(("src", a.id), gw, gz, (gw - gz,), algdeg=None))
    for b in f.target.generators:
        gens.append(Generator(("tgt", b.id), b.grw, b.grz, (b.grw - b.grz,), algdeg=None))
    diff: Entries = {}
    for s, row in f.source.diff.items():
        for t, c in row.items():
            _add_entry(diff, ("src", s), ("src", t), c)
    for s, row in f.target.diff.items():
        for t, c in row.items():
            _add_entry(diff, ("tgt", s), ("tgt", t), c)
    for s, row in f.entries.items():
        for t, c in row.items():
            _add_entry(diff, ("src", s), ("tgt", t), c)
    return FreeComplex(tuple(gens), diff)


def direct_sum(*parts: FreeComplex, tags: Iterable[Hashable] | None = None) -> FreeComplex:
    tags = list(tags) if tags is not None else list(range(len(parts)))
    gens = []
    diff: Entries = {}
    for tag, C in zip(tags, parts):
        for g in C.generators:
            gens.append(Generator((tag, g.id), g.grw, g.grz, g.alex2, g.block, g.algdeg))
        for s, t, c in C.arrows():
            _add_entry(diff, (tag, s), (tag, t), c)
    return FreeComplex(tuple(gens), diff)


def mirror(C: FreeComplex) -> FreeComplex:
    """Swap the roles of W and Z: (gr_w, gr_z) -> (gr_z, gr_w), A -> -A."""
    gens = tuple(Generator(g.id, g.grz, g.grw, tuple(-a for a in g.alex2), g.block, g.algdeg)
                 for g in C.generators)
    diff: Entries = {}
    for s, t, c in C.arrows():
        _add_entry(diff, s, t, RingElement(mono(m.b, m.a) for m in c.terms))
    return FreeComplex(gens, diff)


def relabel(C: FreeComplex, fn: Callable[[Generator], Generator]) -> tuple[FreeComplex, dict]:
    """Apply ``fn`` to every generator; returns the complex and an old->new id map."""
    new = [fn(g) for g in C.generators]
    ids = {g.id: n.id for g, n in zip(C.generators, new)}
    diff: Entries = {}
    for s, t, c in C.arrows():
        _add_entry(diff, ids[s], ids[t], c)
    return FreeComplex(tuple(new), diff), ids


# ---------------------------------------------------------------------------
# reduction


@dataclass
class Reduction:
    complex: FreeComplex
    incl: Morphism | None
    proj: Morphism | None
    homotopy: Morphism | None


def reduce(C: FreeComplex, track: bool = True) -> Reduction:
    """Cancel unit entries until none remain.

    The lexicographically first unit entry (by source then target position)
    is cancelled each round via ``d' = d + (a -> y)(x -> b)``. With ``track``
    the strong deformation retraction (incl, proj, homotopy) is returned.
    """
    pos = {g.id: i for i, g in enumerate(C.generators)}
    alive = set(pos)
    d: Entries = {s: dict(row) for s, row in C.diff.items()}
    pred: dict[Hashable, set] = {}
    for s, row in d.items():
        for t in row:
            pred.setdefault(t, set()).add(s)
    unit = RingElement.of(ONE)

    incl: Entries = {g: {g: unit} for g in alive} if track else {}
    proj: Entries = {g: {g: unit} for g in alive} if track else {}
    proj_rev: dict[Hashable, set] = {g: {g} for g in alive} if track else {}
    homo: Entries = {}

    def set_entry(s, t, c):
        row = d.setdefault(s, {})
        new = row.get(t, RingElement()) + c
        if new:
            row[t] = new
            pred.setdefault(t, set()).add(s)
        else:
            row.pop(t, None)
            pred.get(t, set()).discard(s)

    def first_unit():
        for s in sorted((g for g in d if g in alive and d[g]), key=pos.__getitem__):
            row = d[s]
            cands = [t for t, c in row.items() if c == unit]
            if cands:
                return s, min(cands, key=pos.__getitem__)
        return None

    while True:
        hit = first_unit()
        if hit is None:
            break
        x, y = hit
        into_y = {a: d[a][y] for a in pred.get(y, set()) if a != x}
        out_x = {b: c for b, c in d.get(x, {}).items() if b != y}
        for a, alpha in into_y.items():
            for b, beta in out_x.items():
                set_entry(a, b, alpha * beta)
        if track:
            ix = incl.pop(x)
            incl.pop(y, None)
            for a, alpha in into_y.items():
                for g, c in ix.items():
                    _add_entry(incl, a, g, alpha * c)
            for g in proj_rev.pop(y, set()):
                row = proj.get(g)
                if not row or y not in row:
                    continue
                cy = row.pop(y)
                for b, beta in out_x.items():
                    _add_entry(proj, g, b, cy * beta)
                    proj_rev.setdefault(b, set()).add(g)
                for k, c in ix.items():
                    _add_entry(homo, g, k, cy * c)
                if g in proj and not proj[g]:
                    del proj[g]
            for g in proj_rev.pop(x, set()):
                row = proj.get(g)
                if row:
                    row.pop(x, None)
                    if not row:
                        del proj[g]
        for gone in (x, y):
            alive.discard(gone)
            for t in list(d.get(gone, {})):
                pred.get(t, set()).discard(gone)
            d.pop(gone, None)
            for s in list(pred.get(gone, set())):
                d.get(s, {}).pop(gone, None)
            pred.pop(gone, None)

    gens = tuple(g for g in C.generators if g.id in alive)
    out = FreeComplex(gens, {s: row for s, row in d.items() if s in alive})
    check = validate(out)
    if not check.ok:
        raise ChainError("reduction broke d^2 = 0: " + "; ".join(check.violations[:3]))
    if not track:
        return Reduction(out, None, None, None)
    return Reduction(out,
                     Morphism(out, C, incl, Bigrading(0, 0)),
                     Morphism(C, out, proj, Bigrading(0, 0)),
                     Morphism(C, C, homo, Bigrading(1, 1)))


# ---------------------------------------------------------------------------
# column diagrams and tensoring


@dataclass
class ColumnDiagram:
    """A row of complexes indexed by doubled half-integer columns ``p2``.

    ``step_w(p2)`` maps column p to p-1 and ``step_z(p2)`` maps p to p+1,
    with any U-weight included. ``h_wz(p2)`` is a map column p -> p whose
    boundary is ``step_w(p+1) step_z(p) + U``; ``h_zw(p2)`` bounds
    ``step_z(p-1) step_w(p) + U``. Either may return None for zero.
    """

    column: Callable[[int], FreeComplex]
    shift: Callable[[int], tuple[int, int]]
    step_w: Callable[[int], Morphism]
    step_z: Callable[[int], Morphism]
    h_wz: Callable[[int], Morphism | None] = lambda p2: None
    h_zw: Callable[[int], Morphism | None] = lambda p2: None
    r_offset2: int = 0
    name: str = ""


def word_action(D: ColumnDiagram, p2: int, letter: str, k: int) -> tuple[Morphism, int]:
    """k single-letter steps from column p; returns (map, final column)."""
    f = identity(D.column(p2))
    q = p2
    for _ in range(k):
        if letter == "W":
            f = compose(D.step_w(q), f)
            q -= 2
        else:
            f = compose(D.step_z(q), f)
            q += 2
    return f, q


def monomial_action(D: ColumnDiagram, p2: int, m: Monomial) -> tuple[Morphism, int]:
    """delta_2 of W^i Z^j: U^min(i,j) times the pure leftover word."""
    c, letter, e = unit_or_pure(m)
    f, q = word_action(D, p2, letter or "W", e)
    return (f.scaled(mono(c, c)) if c else f), q


def pair_action(D: ColumnDiagram, p2: int, first: Monomial, second: Monomial) -> tuple[Morphism | None, int]:
    """delta_3(second, first, -) from column p, or None when it vanishes."""
    c1, l1, e1 = unit_or_pure(first)
    c2, l2, e2 = unit_or_pure(second)
    end = p2 - 2 * (first.a - first.b) - 2 * (second.a - second.b)
    if not l1 or not l2 or l1 == l2:
        return None, end
    total: Morphism | None = None
    for k in range(1, min(e1, e2) + 1):
        pre, q = word_action(D, p2, l1, e1 - k)
        corr = D.h_wz(q) if l1 == "Z" else D.h_zw(q)
        if corr is None:
            continue
        post, _ = word_action(D, q, l2, e2 - k)
        term = compose(post, compose(corr, pre))
        if k > 1:
            term = term.scaled(mono(k - 1, k - 1))
        total = term if total is None else total + term
    if total is not None and (c1 + c2):
        total = total.scaled(mono(c1 + c2, c1 + c2))
    return total, end


def _column_of(x: Generator, s2: int) -> int:
    return s2 - x.alex2[-1]


def box_tensor(X: FreeComplex, D: ColumnDiagram, s2: int, tag: Hashable = None) -> FreeComplex:
    """Replace each generator x of X by column ``s - A(x)`` of D.

    Arrows of X act through the single-letter steps of D; composable pairs
    of arrows add the corrector terms.
    """
    gens: list[Generator] = []
    diff: Entries = {}
    cols: dict[Hashable, tuple[int, FreeComplex]] = {}
    for x in X.generators:
        p2 = _column_of(x, s2)
        col = D.column(p2)
        cols[x.id] = (p2, col)
        dw, dz = D.shift(p2)
        for m in col.generators:
            gens.append(Generator((tag, x.id, m.id), x.grw + m.grw + dw, x.grz + m.grz + dz,
                                  (m.alex2[-1] + D.r_offset2,), block=tag, algdeg=m.algdeg))
        for m, row in col.diff.items():
            for m2, c in row.items():
                _add_entry(diff, (tag, x.id, m), (tag, x.id, m2), c)
    for x in X.generators:
        p2, _ = cols[x.id]
        for x1, coef in X.d(x.id).items():
            for a in coef.terms:
                f, _ = monomial_action(D, p2, a)
                for m, row in f.entries.items():
                    for m2, c in row.items():
                        _add_entry(diff, (tag, x.id, m), (tag, x1, m2), c)
                p1, _ = cols[x1]
                for x2, coef2 in X.d(x1).items():
                    for b in coef2.terms:
                        g, _ = pair_action(D, p2, a, b)
                        if g is None:
                            continue
                        for m, row in g.entries.items():
                            for m2, c in row.items():
                                _add_entry(diff, (tag, x.id, m), (tag, x2, m2), c)
    return FreeComplex(tuple(gens), diff)


@dataclass
class ColumnMorphism:
    """Column-wise data of a map between two rows.

    ``f1(p2)`` maps source column p to target column ``p + offset2``.
    ``f2(letter, p2)`` is the correction attached to a single letter acting
    from source column p (None for zero).
    """

    f1: Callable[[int], Morphism]
    f2: Callable[[str, int], Morphism | None]
    offset2: int = 0


def letter_correction(Dsrc: ColumnDiagram, Dtgt: ColumnDiagram, f: ColumnMorphism,
                       p2: int, a: Monomial) -> Morphism | None:
    c, letter, e = unit_or_pure(a)
    if not letter:
        return None
    step = -2 if letter == "W" else 2
    total: Morphism | None = None
    for i in range(e):
        q = p2 + step * i
        corr = f.f2(letter, q)
        if corr is None:
            continue
        pre, _ = word_action(Dsrc, p2, letter, i)
        post, _ = word_action(Dtgt, q + step + f.offset2, letter, e - 1 - i)
        term = compose(post, compose(corr, pre))
        total = term if total is None else total + term
    if total is not None and c:
        total = total.scaled(mono(c, c))
    return total


def box_tensor_morphism(X: FreeComplex, Dsrc: ColumnDiagram, Dtgt: ColumnDiagram,
                        f: ColumnMorphism, s2_src: int, s2_tgt: int,
                        src: FreeComplex, tgt: FreeComplex,
                        tags: tuple[Hashable, Hashable] = (None, None),
                        degree: tuple[int, int] = (-1, -1)) -> Morphism:
    """``x (x) m -> x (x) f1(m) + sum over dx = x' (x) a of x' (x) f2(a, m)``."""
    ts, tt = tags
    out: Entries = {}
    for x in X.generators:
        p2 = _column_of(x, s2_src)
        q2 = _column_of(x, s2_tgt)
        if q2 != p2 + f.offset2:
            raise ChainError("column offset mismatch between source and target walls")
        for m, row in f.f1(p2).entries.items():
            for m2, c in row.items():
                _add_entry(out, (ts, x.id, m), (tt, x.id, m2), c)
        for x1, coef in X.d(x.id).items():
            for a in coef.terms:
                g = letter_correction(Dsrc, Dtgt, f, p2, a)
                if g is None:
                    continue
                for m, row in g.entries.items():
                    for m2, c in row.items():
                        _add_entry(out, (ts, x.id, m), (tt, x1, m2), c)
    return Morphism(src, tgt, out, Bigrading(*degree))


# ---------------------------------------------------------------------------
# isomorphism testing


def _bucket_key(g: Generator) -> tuple:
    return (g.grw, g.grz, g.alex2)


def _permutation_match(C1: FreeComplex, C2: FreeComplex) -> dict | None:
    """Backtracking search for a generator bijection carrying d1 onto d2."""
    if len(C1) != len(C2):
        return None
    buckets: dict[tuple, list[Hashable]] = {}
    for g in C2.generators:
        buckets.setdefault(_bucket_key(g), []).append(g.id)
    for g in C1.generators:
        buckets.setdefault(_bucket_key(g), [])
    counts1: dict[tuple, int] = {}
    for g in C1.generators:
        counts1[_bucket_key(g)] = counts1.get(_bucket_key(g), 0) + 1
    if any(len(buckets[k]) != v for k, v in counts1.items()):
        return None

    def profile(C: FreeComplex, gid):
        out_w = sorted((repr(sorted(c.terms)) for c in C.d(gid).values()))
        return len(C.d(gid)), tuple(out_w)

    pred1 = C1.predecessors()
    pred2 = C2.predecessors()
    order = sorted(C1.ids(), key=lambda g: (-len(C1.d(g)) - len(pred1.get(g, {})), C1.position(g)))
    mapping: dict = {}
    used: set = set()

    def consistent(a, b) -> bool:
        if profile(C1, a) != profile(C2, b):
            return False
        if len(pred1.get(a, {})) != len(pred2.get(b, {})):
            return False
        for t, c in C1.d(a).items():
            if t in mapping and C2.d(b).get(mapping[t]) != c:
                return False
        for s, c in pred1.get(a, {}).items():
            if s in mapping and C2.d(mapping[s]).get(b) != c:
                return False
        for t in C2.d(b):
            inv = [k for k, v in mapping.items() if v == t]
            if inv and C1.d(a).get(inv[0]) != C2.d(b)[t]:
                return False
        for s in pred2.get(b, {}):
            inv = [k for k, v in mapping.items() if v == s]
            if inv and C1.d(inv[0]).get(a) != C2.d(s)[b]:
                return False
        return True

    def search(i: int) -> bool:
        if i == len(order):
            return True
        a = order[i]
        for b in buckets[_bucket_key(C1.gen(a))]:
            if b in used or not consistent(a, b):
                continue
            mapping[a] = b
            used.add(b)
            if search(i + 1):
                return True
            del mapping[a]
            used.discard(b)
        return False

    return dict(mapping) if search(0) else None


def _chain_map_space(C1: FreeComplex, C2: FreeComplex) -> tuple[list[Unknown], list[list[int]]]:
    unknowns = _admissible_unknowns(C1, C2, Bigrading(0, 0), None)
    pred = C1.predecessors()
    # chain map equation: d2 f + f d1 = 0, same system shape as a homotopy
    eqs = _homotopy_system(unknowns, C1.diff, C2.diff, pred)
    system = GF2System(len(unknowns))
    for key in sorted(eqs, key=repr):
        system.add(eqs[key])
    return unknowns, system.nullspace()


# GF(2^8) with the AES polynomial, used only to test invertibility generically.
_EXP = [0] * 512
_LOG = [0] * 256


def _init_field() -> None:
    x = 1
    for i in range(255):
        _EXP[i] = x
        _LOG[x] = i
        x ^= x << 1
        if x & 0x100:
            x ^= 0x11B
    for i in range(255, 512):
        _EXP[i] = _EXP[i - 255]


_init_field()


def _gmul(a: int, b: int) -> int:
    if not a or not b:
        return 0
    return _EXP[_LOG[a] + _LOG[b]]


def _ginv(a: int) -> int:
    return _EXP[255 - _LOG[a]]


def _det_nonzero(mat: list[list[int]]) -> bool:
    n = len(mat)
    m = [row[:] for row in mat]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col]), None)
        if piv is None:
            return False
        m[col], m[piv] = m[piv], m[col]
        inv = _ginv(m[col][col])
        for r in range(col + 1, n):
            if m[r][col]:
                factor = _gmul(m[r][col], inv)
                m[r] = [v ^ _gmul(factor, w) for v, w in zip(m[r], m[col])]
    return True


def _constant_blocks(C1: FreeComplex, C2: FreeComplex) -> dict[tuple, tuple[list, list]]:
    blocks: dict[tuple, tuple[list, list]] = {}
    for g in C1.generators:
        blocks.setdefault(_bucket_key(g), ([], []))[0].append(g.id)
    for g in C2.generators:
        blocks.setdefault(_bucket_key(g), ([], []))[1].append(g.id)
    return blocks


def _generic_iso(C1: FreeComplex, C2: FreeComplex, trials: int, rng: random.Random) -> bool:
    blocks = _constant_blocks(C1, C2)
    if any(len(a) != len(b) for a, b in blocks.values()):
        return False
    unknowns, basis = _chain_map_space(C1, C2)
    if not basis:
        return not C1.generators
    index = {}
    for k, (a, b, m) in enumerate(unknowns):
        if m == ONE and _bucket_key(C1.gen(a)) == _bucket_key(C2.gen(b)):
            index[(a, b)] = k
    for _ in range(trials):
        lam = [rng.randrange(1, 256) for _ in basis]
        vals: dict[int, int] = {}
        for coeff, vec in zip(lam, basis):
            for k in index.values():
                if vec[k]:
                    vals[k] = vals.get(k, 0) ^ coeff
        ok = True
        for key, (a_ids, b_ids) in blocks.items():
            mat = [[vals.get(index.get((a, b), -1), 0) for b in b_ids] for a in a_ids]
            if not _det_nonzero(mat):
                ok = False
                break
        if ok:
            return True
    return False


def find_isomorphism(C1: FreeComplex, C2: FreeComplex, trials: int = 64,
                     seed: int = 0) -> Morphism | None:
    """An explicit GF(2) isomorphism C1 -> C2, or None if none was found."""
    perm = _permutation_match(C1, C2)
    unit = RingElement.of(ONE)
    if perm is not None:
        return Morphism(C1, C2, {a: {b: unit} for a, b in perm.items()}, Bigrading(0, 0))
    blocks = _constant_blocks(C1, C2)
    if any(len(a) != len(b) for a, b in blocks.values()):
        return None
    unknowns, basis = _chain_map_space(C1, C2)
    rng = random.Random(seed)
    for _ in range(trials):
        pick = [rng.randrange(2) for _ in basis]
        vec = [0] * len(unknowns)
        for bit, v in zip(pick, basis):
            if bit:
                vec = [p ^ q for p, q in zip(vec, v)]
        entries: Entries = {}
        for v, (a, b, m) in zip(vec, unknowns):
            if v:
                _add_entry(entries, a, b, RingElement.of(m))
        ok = True
        for a_ids, b_ids in blocks.values():
            mat = [[1 if (entries.get(a, {}).get(b) is not None and ONE in entries[a][b].terms) else 0
                    for b in b_ids] for a in a_ids]
            if not _det_nonzero(mat):
                ok = False
                break
        if ok:
            return Morphism(C1, C2, entries, Bigrading(0, 0))
    return None


def iso_check(C1: FreeComplex, C2: FreeComplex, trials: int = 24, seed: int = 0) -> bool:
    """True iff C1 and C2 are isomorphic as graded complexes.

    Permutation matching first; otherwise a generic chain map (random
    GF(2^8) combination of a basis of degree-0 chain maps) is tested for an
    invertible constant part in every grading bucket.
    """
    if len(C1) != len(C2):
        return False
    if _permutation_match(C1, C2) is not None:
        return True
    return _generic_iso(C1, C2, trials, random.Random(seed))
