"""Alexander polynomials, knot and two-component link H-functions, and the
truncation bound N.

Two-variable exponents are half-integers and stored doubled; one-variable
exponents are integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .ring import half_str


class AlexanderError(ValueError):
    pass


@dataclass(frozen=True)
class LaurentPoly1:
    coeffs: Mapping[int, int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", {k: v for k, v in sorted(self.coeffs.items()) if v})

    @classmethod
    def from_list(cls, low: int, values: Iterable[int]) -> LaurentPoly1:
        return cls({low + i: v for i, v in enumerate(values)})

    def __mul__(self, other: LaurentPoly1) -> LaurentPoly1:
        out: dict[int, int] = {}
        for a, x in self.coeffs.items():
            for b, y in other.coeffs.items():
                out[a + b] = out.get(a + b, 0) + x * y
        return LaurentPoly1(out)

    def __add__(self, other: LaurentPoly1) -> LaurentPoly1:
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return LaurentPoly1(out)

    def __neg__(self) -> LaurentPoly1:
        return LaurentPoly1({k: -v for k, v in self.coeffs.items()})

    def substitute_power(self, p: int) -> LaurentPoly1:
        """Delta(t) -> Delta(t^p)."""
        return LaurentPoly1({k * p: v for k, v in self.coeffs.items()})

    def shifted(self, k: int) -> LaurentPoly1:
        return LaurentPoly1({a + k: v for a, v in self.coeffs.items()})

    def value_at_one(self) -> int:
        return sum(self.coeffs.values())

    def is_symmetric(self) -> bool:
        return all(self.coeffs.get(-k, 0) == v for k, v in self.coeffs.items())

    @property
    def degree(self) -> int:
        return max(self.coeffs) if self.coeffs else 0

    def normalized(self) -> LaurentPoly1:
        """Shift and sign so the polynomial is symmetric with positive top coefficient,
        when possible; used to compare up to units."""
        if not self.coeffs:
            return self
        lo, hi = min(self.coeffs), max(self.coeffs)
        if (lo + hi) % 2:
            return self
        p = self.shifted(-(lo + hi) // 2)
        return -p if p.coeffs[max(p.coeffs)] < 0 else p

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        return " + ".join(f"{v}*t^{k}" for k, v in sorted(self.coeffs.items(), reverse=True))


ONE_POLY = LaurentPoly1({0: 1})


def poly_from_exponents(signed: Iterable[tuple[int, int]]) -> LaurentPoly1:
    out: dict[int, int] = {}
    for e, c in signed:
        out[e] = out.get(e, 0) + c
    return LaurentPoly1(out)


def torus_knot_poly(p: int, q: int) -> LaurentPoly1:
    """Symmetrized Alexander polynomial of T(p,q), by exact polynomial division."""
    if p <= 0 or q <= 0:
        raise AlexanderError("torus knot parameters must be positive")
    # (t^{pq} - 1)(t - 1) / ((t^p - 1)(t^q - 1))
    num = _poly_mul(_binom(p * q), _binom(1))
    den = _poly_mul(_binom(p), _binom(q))
    quo = _poly_div(num, den)
    deg = len(quo) - 1
    if deg % 2:
        raise AlexanderError("unexpected odd degree")
    return LaurentPoly1({i - deg // 2: c for i, c in enumerate(quo)})


def _binom(k: int) -> list[int]:
    out = [0] * (k + 1)
    out[0], out[k] = -1, 1
    return out


def _poly_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_div(num: list[int], den: list[int]) -> list[int]:
    num = num[:]
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1] // den[-1]
        out[i] = c
        for j, d in enumerate(den):
            num[i + j] -= c * d
    if any(num):
        raise AlexanderError("inexact division")
    return out


@dataclass(frozen=True)
class LaurentPoly2:
    """Two-variable Laurent polynomial with doubled half-integer exponents."""

    coeffs: Mapping[tuple[int, int], int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", {k: v for k, v in sorted(self.coeffs.items()) if v})

    def is_symmetric(self) -> bool:
        items = self.coeffs.items()
        same = all(self.coeffs.get((2 - a, 2 - b), 0) == v for (a, b), v in items)
        flip = all(self.coeffs.get((2 - a, 2 - b), 0) == -v for (a, b), v in items)
        return same or flip

    def __str__(self) -> str:
        return " + ".join(f"{v}*t1^{half_str(a)}*t2^{half_str(b)}" for (a, b), v in self.coeffs.items())


def knot_tail_sum(delta: LaurentPoly1, m: int) -> int:
    """Partial sum over degrees >= m of Delta(t)(1 + t^-1 + t^-2 + ...).

    For an L-space knot this equals H_K(m - 1).
    """
    if not delta.is_symmetric():
        raise AlexanderError("Alexander polynomial is not symmetric")
    return sum(c * max(0, k - m + 1) for k, c in delta.coeffs.items())


def knot_h(delta: LaurentPoly1, s: int) -> int:
    """H-function of an L-space knot with Alexander polynomial ``delta``."""
    return knot_tail_sum(delta, s + 1)


@dataclass
class HFunction:
    """Windowed H(s,t) on doubled coordinates, extended by the stable rules:
    slope one below the window, constant above it."""

    lk: int
    s_range: tuple[int, int]
    t_range: tuple[int, int]
    table: dict[tuple[int, int], int] = field(default_factory=dict)

    def __call__(self, s2: int, t2: int) -> int:
        s_lo, s_hi = self.s_range
        t_lo, t_hi = self.t_range
        sc = min(max(s2, s_lo), s_hi)
        tc = min(max(t2, t_lo), t_hi)
        extra = max(0, s_lo - s2) // 2 + max(0, t_lo - t2) // 2
        return self.table[(sc, tc)] + extra

    def s_values(self) -> list[int]:
        return list(range(self.s_range[0], self.s_range[1] + 1, 2))

    def t_values(self) -> list[int]:
        return list(range(self.t_range[0], self.t_range[1] + 1, 2))

    def rows(self, s_lo: int, s_hi: int, t_lo: int, t_hi: int) -> list[tuple[int, list[int]]]:
        """Table rows from top t to bottom t, columns by increasing s."""
        return [(t, [self(s, t) for s in range(s_lo, s_hi + 1, 2)])
                for t in range(t_hi, t_lo - 1, -2)]

    def invariant_violations(self) -> list[str]:
        bad = []
        for (s, t), v in self.table.items():
            if v < 0:
                bad.append(f"negative H at {(s, t)}")
            for ds, dt in ((2, 0), (0, 2)):
                step = self(s - ds, t - dt) - v
                if step not in (0, 1):
                    bad.append(f"step {step} at {(s, t)}")
            if (-s, -t) in self.table:
                if self.table[(-s, -t)] != v + (s + t) // 2:
                    bad.append(f"symmetry at {(s, t)}")
        return bad


def _gn_value(delta_l: LaurentPoly2, d1: LaurentPoly1, d2: LaurentPoly1, lk: int,
              s2: int, t2: int) -> int:
    m1, m2 = s2 - lk + 2, t2 - lk + 2
    if m1 % 2 or m2 % 2:
        raise AlexanderError("lattice point outside the lk/2 coset")
    corner = sum(c for (a, b), c in delta_l.coeffs.items() if a >= s2 + 2 and b >= t2 + 2)
    return knot_tail_sum(d1, m1 // 2) + knot_tail_sum(d2, m2 // 2) - corner


def h_function_2comp(delta_l: LaurentPoly2, d1: LaurentPoly1, d2: LaurentPoly1, lk: int,
                     window: tuple[int, int] | tuple[tuple[int, int], tuple[int, int]]) -> HFunction:
    """H-function of an L-space link from its Alexander polynomials.

    ``window`` is either ``(lo2, hi2)`` for both coordinates or a pair of such
    ranges; endpoints are doubled and snapped into the lattice coset.
    """
    if isinstance(window[0], int):
        ranges = (window, window)
    else:
        ranges = window  # type: ignore[assignment]
    parity = lk % 2
    snapped = []
    for lo, hi in ranges:  # type: ignore[misc]
        lo = lo if lo % 2 == parity else lo - 1
        hi = hi if hi % 2 == parity else hi + 1
        snapped.append((lo, hi))
    H = HFunction(lk, snapped[0], snapped[1])
    for s in range(snapped[0][0], snapped[0][1] + 1, 2):
        for t in range(snapped[1][0], snapped[1][1] + 1, 2):
            H.table[(s, t)] = _gn_value(delta_l, d1, d2, lk, s, t)
    # the extrapolation rules must agree with the formula just past the window
    for s in range(snapped[0][0] - 2, snapped[0][1] + 3, 2):
        for t in (snapped[1][0] - 2, snapped[1][1] + 2):
            if H(s, t) != _gn_value(delta_l, d1, d2, lk, s, t):
                raise AlexanderError("window too small to verify extrapolation")
    for t in range(snapped[1][0] - 2, snapped[1][1] + 3, 2):
        for s in (snapped[0][0] - 2, snapped[0][1] + 2):
            if H(s, t) != _gn_value(delta_l, d1, d2, lk, s, t):
                raise AlexanderError("window too small to verify extrapolation")
    return H


def compute_N(delta_l: LaurentPoly2) -> int:
    """Doubled truncation bound: the top t1-exponent of Delta_L."""
    if not delta_l.coeffs:
        raise AlexanderError("zero polynomial")
    return max(a for a, _ in delta_l.coeffs)


def verify_N(bimodule, N2: int) -> bool:
    """L_sigma on C_q and L_tau on C_-q are equivalences for q >= N but not at N - 1."""
    from .chain import cone, reduce

    def contractible(q2: int) -> bool:
        right = reduce(cone(bimodule.Lsigma(q2)), track=False).complex
        left = reduce(cone(bimodule.Ltau(-q2)), track=False).complex
        return len(right) == 0 and len(left) == 0

    return contractible(N2) and not contractible(N2 - 2)


def euler_char(C, alex_index: int = -1) -> LaurentPoly1:
    """Sum over generators of (-1)^gr_w t^A."""
    out: dict[int, int] = {}
    for g in C.generators:
        a2 = g.alex2[alex_index] if g.alex2 else g.grw - g.grz
        if a2 % 2:
            raise AlexanderError("half-integral Alexander grading in Euler characteristic")
        sign = -1 if g.grw % 2 else 1
        out[a2 // 2] = out.get(a2 // 2, 0) + sign
    return LaurentPoly1(out)


def as_fraction(x2: int) -> Fraction:
    return Fraction(x2, 2)
