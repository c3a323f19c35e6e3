"""The reduced pattern bimodule: staircases C_s cut from the link H-function,
the pattern knot staircase S, the letter actions and their corrector
homotopies, plus the library of built-in patterns."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd

from .alexander import (
    ONE_POLY,
    HFunction,
    LaurentPoly1,
    LaurentPoly2,
    compute_N,
    h_function_2comp,
    torus_knot_poly,
)
from .chain import (
    ChainError,
    FreeComplex,
    Generator,
    Morphism,
    boundary,
    compose,
    cone,
    identity,
    is_chain_map,
    lift_chain_map,
    reduce,
    solve_null_homotopy,
    validate,
    validate_morphism,
)
from .ring import RingElement, mono

U1 = mono(1, 1)


class PatternError(ValueError):
    pass


@dataclass(frozen=True)
class PatternData:
    name: str
    delta_l: LaurentPoly2
    delta_p: LaurentPoly1
    l: int

    @property
    def N2(self) -> int:
        return compute_N(self.delta_l)


def _poly2(terms: dict[tuple[int, int], int]) -> LaurentPoly2:
    return LaurentPoly2(terms)


def _two_bridge_terms(m: int) -> dict[tuple[int, int], int]:
    # (t1 t2)^((1-m)/2) (sum_{i<m} (t1 t2)^i (t1 + t2) - sum_{i<=m} (t1 t2)^i)
    base = 1 - m
    out: dict[tuple[int, int], int] = {}

    def add(a: int, b: int, c: int) -> None:
        key = (base + 2 * a, base + 2 * b)
        out[key] = out.get(key, 0) + c

    for i in range(m):
        add(i + 1, i, 1)
        add(i, i + 1, 1)
    for i in range(m + 1):
        add(i, i, -1)
    return out


def builtin_pattern(name: str, p: int | None = None, q: int | None = None,
                    m: int | None = None) -> PatternData:
    """Built-in patterns: torus2q(q), cable(p,q), whitehead, mazur, ktwobridge(m)."""
    key = name.lower()
    if key == "torus2q":
        if q is None or q < 1:
            raise PatternError("torus2q needs q >= 1")
        terms = {(1 + k, 1 + k): 1 for k in range(-(q - 1), q, 2)}
        return PatternData(f"torus2q({q})", _poly2(terms), ONE_POLY, q)
    if key == "whitehead":
        return PatternData("whitehead", _poly2(_two_bridge_terms(1)), ONE_POLY, 0)
    if key == "mazur":
        return PatternData("mazur", _poly2(_two_bridge_terms(2)), ONE_POLY, 1)
    if key == "ktwobridge":
        if m is None or m < 1:
            raise PatternError("ktwobridge needs m >= 1")
        return PatternData(f"ktwobridge({m})", _poly2(_two_bridge_terms(m)), ONE_POLY, m - 1)
    if key == "cable":
        if p is None or q is None or p < 1 or q < 1 or gcd(p, q) != 1:
            raise PatternError("cable needs coprime p, q >= 1")
        # t1^(1-p/2) t2^((q+1-pq)/2) sum_{i<p} t1^i t2^(qi)
        terms = {(2 - p + 2 * i, q + 1 - p * q + 2 * q * i): 1 for i in range(p)}
        return PatternData(f"cable({p},{q})", _poly2(terms), torus_knot_poly(p, q), p)
    raise PatternError(f"unknown pattern {name!r}")


# ---------------------------------------------------------------------------
# staircases


def _staircase(name: str, corners: list[tuple[int, int, tuple[int, ...]]]) -> FreeComplex:
    """Staircase on cycles given top-down as (gr_w, gr_z, alex2); the
    connecting generators get the unique homogeneous weights."""
    gens: list[Generator] = []
    diff: dict = {}
    prev = None
    for k, (gw, gz, alex) in enumerate(corners):
        x = Generator(f"x{2 * k}", gw, gz, alex, algdeg=0)
        if prev is not None:
            alpha = (prev.grw - gw) // 2
            beta = (gz - prev.grz) // 2
            if alpha <= 0 or beta <= 0:
                raise ChainError(f"{name}: non-staircase step {alpha}, {beta}")
            y = Generator(f"y{2 * k - 1}", prev.grw - 2 * alpha + 1, prev.grz + 1,
                          prev.alex2[:-1] + (prev.alex2[-1] - 2 * alpha,), algdeg=1)
            gens.append(y)
            diff[y.id] = {prev.id: RingElement.of(mono(alpha, 0)), x.id: RingElement.of(mono(0, beta))}
        gens.append(x)
        prev = x
    # order: x0, y1, x2, ...
    gens.sort(key=lambda g: int(g.id[1:]))
    return FreeComplex(tuple(gens), diff)


def staircase_from_slice(H: HFunction, s2: int) -> FreeComplex:
    """Staircase C_s: a cycle at each t where the slice turns from slope one to flat."""
    t_lo, t_hi = H.t_range
    corners = []
    for t2 in range(t_hi + 2, t_lo - 4, -2):
        v = H(s2, t2)
        if H(s2, t2 + 2) == v and H(s2, t2 - 2) == v + 1:
            gw = -2 * v
            corners.append((gw, gw - (s2 + t2), (s2, t2)))
    if not corners:
        raise ChainError(f"slice at s={s2}/2 has no corner inside the window")
    return _staircase(f"C[{s2}/2]", corners)


def pattern_staircase(delta_p: LaurentPoly1) -> FreeComplex:
    """Staircase of an L-space knot from the exponent gaps of its Alexander polynomial."""
    items = sorted(delta_p.coeffs.items(), reverse=True)
    signs = [c for _, c in items]
    if any(abs(c) != 1 for c in signs) or any(signs[i] == signs[i + 1] for i in range(len(signs) - 1)) \
            or (signs and signs[0] != 1) or len(items) % 2 == 0:
        raise PatternError("Alexander polynomial is not that of an L-space knot")
    exps = [e for e, _ in items]
    corners = []
    gw, gz = 0, -2 * exps[0]
    corners.append((gw, gz, (2 * exps[0],)))
    for i in range(0, len(exps) - 1, 2):
        alpha = exps[i] - exps[i + 1]
        beta = exps[i + 1] - exps[i + 2]
        gw -= 2 * alpha
        gz += 2 * beta
        corners.append((gw, gz, (2 * exps[i + 2],)))
    return _staircase("S", corners)


# ---------------------------------------------------------------------------
# the bimodule


@dataclass
class BimoduleReport:
    ok: bool
    failures: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


class PatternBimodule:
    """Lazily built structure maps of the U-equivariant pattern bimodule.

    Every index is a doubled half-integer ``s2``; maps are cached so repeated
    requests return the same objects.
    """

    def __init__(self, pattern: PatternData, H: HFunction, window: tuple[int, int]) -> None:
        self.pattern = pattern
        self.H = H
        self.window = window
        self.l = pattern.l
        self.S = pattern_staircase(pattern.delta_p)
        self._cache: dict = {}

    @property
    def N2(self) -> int:
        return self.pattern.N2

    def s_values(self) -> list[int]:
        lo, hi = self.window
        return list(range(lo, hi + 1, 2))

    def _memo(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def C(self, s2: int) -> FreeComplex:
        return self._memo(("C", s2), lambda: staircase_from_slice(self.H, s2))

    def LW(self, s2: int) -> Morphism:
        return self._memo(("LW", s2), lambda: lift_chain_map(self.C(s2), self.C(s2 - 2), (-2, 0)))

    def LZ(self, s2: int) -> Morphism:
        return self._memo(("LZ", s2), lambda: lift_chain_map(self.C(s2), self.C(s2 + 2), (0, -2)))

    def Lsigma(self, s2: int) -> Morphism:
        return self._memo(("Ls", s2), lambda: lift_chain_map(self.C(s2), self.S, (0, s2 + self.l)))

    def Ltau(self, s2: int) -> Morphism:
        return self._memo(("Lt", s2), lambda: lift_chain_map(self.C(s2), self.S, (self.l - s2, 0)))

    # corrector homotopies; each bounds the stated sum exactly
    def hWZ_target(self, s2: int) -> Morphism:
        return compose(self.LW(s2 + 2), self.LZ(s2)) + identity(self.C(s2), U1)

    def hZW_target(self, s2: int) -> Morphism:
        return compose(self.LZ(s2 - 2), self.LW(s2)) + identity(self.C(s2), U1)

    def hSigW_target(self, s2: int) -> Morphism:
        return compose(self.Lsigma(s2 - 2), self.LW(s2)) + self.Lsigma(s2).scaled(U1)

    def hSigZ_target(self, s2: int) -> Morphism:
        return compose(self.Lsigma(s2 + 2), self.LZ(s2)) + self.Lsigma(s2)

    def hTauW_target(self, s2: int) -> Morphism:
        return compose(self.Ltau(s2 - 2), self.LW(s2)) + self.Ltau(s2)

    def hTauZ_target(self, s2: int) -> Morphism:
        return compose(self.Ltau(s2 + 2), self.LZ(s2)) + self.Ltau(s2).scaled(U1)

    def _h(self, name: str, s2: int) -> Morphism:
        target = getattr(self, f"{name}_target")
        return self._memo((name, s2), lambda: solve_null_homotopy(target(s2)))

    def hWZ(self, s2: int) -> Morphism:
        return self._h("hWZ", s2)

    def hZW(self, s2: int) -> Morphism:
        return self._h("hZW", s2)

    def hSigW(self, s2: int) -> Morphism:
        return self._h("hSigW", s2)

    def hSigZ(self, s2: int) -> Morphism:
        return self._h("hSigZ", s2)

    def hTauW(self, s2: int) -> Morphism:
        return self._h("hTauW", s2)

    def hTauZ(self, s2: int) -> Morphism:
        return self._h("hTauZ", s2)

    HOMOTOPIES = ("hWZ", "hZW", "hSigW", "hSigZ", "hTauW", "hTauZ")


def default_window(pattern: PatternData, genus: int = 0) -> tuple[int, int]:
    extent = max(max(abs(a), abs(b)) for a, b in pattern.delta_l.coeffs)
    half = max(extent, pattern.N2) + 2 * (genus + 2)
    return (-half, half)


def build_bimodule(pattern: PatternData, genus: int = 0,
                   window: tuple[int, int] | None = None) -> PatternBimodule:
    """Build the H-function and the bimodule data on a window of s-values."""
    win = window if window is not None else default_window(pattern, genus)
    lo, hi = win
    H = h_function_2comp(pattern.delta_l, ONE_POLY, pattern.delta_p, pattern.l,
                         (lo - 4, hi + 4))
    return _make(pattern, H, win)


def _make(pattern: PatternData, H: HFunction, win: tuple[int, int]) -> PatternBimodule:
    # s-coordinates of C_s live in the coset Z + l/2 of the meridian lattice
    parity = pattern.l % 2
    lo, hi = win
    lo = lo if lo % 2 == parity else lo - 1
    hi = hi if hi % 2 == parity else hi + 1
    return PatternBimodule(pattern, H, (lo, hi))


def verify_bimodule(B: PatternBimodule, s_values: list[int] | None = None) -> BimoduleReport:
    """Check every structure equation exactly on the window, and that L_sigma,
    L_tau are equivalences past N."""
    fails: list[str] = []
    svals = s_values if s_values is not None else B.s_values()
    inner = [s for s in svals if s - 2 >= svals[0] and s + 2 <= svals[-1]]

    def check(cond: bool, msg: str) -> None:
        if not cond:
            fails.append(msg)

    for s in svals:
        rep = validate(B.C(s))
        check(rep.ok, f"C[{s}/2] invalid: {rep.violations[:1]}")
    check(validate(B.S).ok, "S invalid")
    for s in inner:
        for name in ("LW", "LZ", "Lsigma", "Ltau"):
            f = getattr(B, name)(s)
            check(is_chain_map(f), f"{name}[{s}/2] is not a chain map")
            check(validate_morphism(f).ok, f"{name}[{s}/2] grading")
        for name in B.HOMOTOPIES:
            h = getattr(B, name)(s)
            target = getattr(B, f"{name}_target")(s)
            check(boundary(h) == target, f"{name}[{s}/2] boundary mismatch")
            check(validate_morphism(h).ok, f"{name}[{s}/2] grading")
    N2 = B.N2
    for q in (N2, N2 + 2):
        if q <= svals[-1] and -q >= svals[0]:
            right = reduce(cone(B.Lsigma(q)), track=False).complex
            left = reduce(cone(B.Ltau(-q)), track=False).complex
            check(len(right) == 0, f"L_sigma not an equivalence at {q}/2")
            check(len(left) == 0, f"L_tau not an equivalence at {-q}/2")
    return BimoduleReport(not fails, fails)
