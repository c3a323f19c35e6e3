"""Coefficient rings F[W,Z] (idempotent 0) and F[U,T,T^-1] (idempotent 1) over GF(2).

Half-integers appear throughout the package; they are stored doubled so all
arithmetic stays in ``int``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple


class RingError(ValueError):
    """Raised on idempotent mismatch or malformed coefficient strings."""


class Bigrading(NamedTuple):
    gr_w: int
    gr_z: int

    @property
    def alex2(self) -> int:
        """Doubled Alexander degree, i.e. gr_w - gr_z."""
        return self.gr_w - self.gr_z

    @property
    def alex(self) -> Fraction:
        return Fraction(self.gr_w - self.gr_z, 2)

    def __add__(self, other: tuple) -> Bigrading:  # type: ignore[override]
        return Bigrading(self.gr_w + other[0], self.gr_z + other[1])

    def __sub__(self, other: tuple) -> Bigrading:
        return Bigrading(self.gr_w - other[0], self.gr_z - other[1])


class Monomial(NamedTuple):
    """``W^a Z^b`` when ``idem == 0``; ``U^a T^b`` when ``idem == 1``."""

    idem: int
    a: int
    b: int

    @property
    def bigrading(self) -> Bigrading:
        if self.idem == 0:
            return Bigrading(-2 * self.a, -2 * self.b)
        return Bigrading(-2 * self.a, -2 * self.a)

    @property
    def alex(self) -> int:
        """Alexander degree; W lowers it by one, Z raises it, U and T are neutral."""
        return self.b - self.a if self.idem == 0 else 0

    def __mul__(self, other: Monomial) -> Monomial:  # type: ignore[override]
        return mul(self, other)

    def __str__(self) -> str:
        return format_monomial(self)


def W(i: int = 1) -> Monomial:
    return mono(i, 0)


def Z(j: int = 1) -> Monomial:
    return mono(0, j)


def U0(k: int = 1) -> Monomial:
    """U^k = W^k Z^k inside F[W,Z]."""
    return mono(k, k)


def mono(i: int, j: int) -> Monomial:
    if i < 0 or j < 0:
        raise RingError(f"negative exponent in W^{i} Z^{j}")
    return Monomial(0, i, j)


def mono_ut(u: int, k: int) -> Monomial:
    if u < 0:
        raise RingError(f"negative U-power {u}")
    return Monomial(1, u, k)


ONE = Monomial(0, 0, 0)
ONE_UT = Monomial(1, 0, 0)


def mul(x: Monomial, y: Monomial) -> Monomial:
    if x.idem != y.idem:
        raise RingError("idempotent mismatch in product")
    return Monomial(x.idem, x.a + y.a, x.b + y.b)


def phi_sigma(m: Monomial) -> Monomial:
    """W^i Z^j -> U^i T^(j-i)."""
    if m.idem != 0:
        raise RingError("phi_sigma expects an idempotent-0 monomial")
    return Monomial(1, m.a, m.b - m.a)


def phi_tau(m: Monomial) -> Monomial:
    """W^i Z^j -> U^j T^(j-i)."""
    if m.idem != 0:
        raise RingError("phi_tau expects an idempotent-0 monomial")
    return Monomial(1, m.b, m.b - m.a)


def monomial_for_grading(idem: int, drop: tuple[int, int]) -> Monomial | None:
    """The idempotent-0 monomial of bigrading ``drop``, or None if it would need
    negative or fractional exponents. Only idempotent 0 is supported."""
    if idem != 0:
        raise RingError("grading lookup only defined in F[W,Z]")
    dw, dz = drop
    if dw > 0 or dz > 0 or dw % 2 or dz % 2:
        return None
    return Monomial(0, -dw // 2, -dz // 2)


def unit_or_pure(m: Monomial) -> tuple[int, str, int]:
    """Split W^a Z^b into (U-power, letter, excess) with letter in {'W','Z',''}."""
    c = min(m.a, m.b)
    if m.a > c:
        return c, "W", m.a - c
    if m.b > c:
        return c, "Z", m.b - c
    return c, "", 0


_POW = r"(?:\^\s*(-?\d+))?"
_FACTOR = re.compile(r"([WZUT])" + _POW)


def format_monomial(m: Monomial) -> str:
    names = ("W", "Z") if m.idem == 0 else ("U", "T")
    parts = []
    for name, e in zip(names, (m.a, m.b)):
        if e == 0:
            continue
        parts.append(name if e == 1 else f"{name}^{e}")
    return " ".join(parts) if parts else "1"


def parse_monomial(text: str, idem: int | None = None) -> Monomial:
    """Parse ``"W^2 Z"``, ``"U^3 T^-1"``, ``"1"``. In idempotent 0, ``U`` means WZ."""
    s = text.strip()
    if s in ("1", ""):
        return Monomial(idem or 0, 0, 0)
    pos = 0
    w = z = u = t = 0
    for match in _FACTOR.finditer(s):
        if s[pos:match.start()].strip():
            raise RingError(f"cannot parse monomial {text!r}")
        pos = match.end()
        e = int(match.group(2)) if match.group(2) is not None else 1
        letter = match.group(1)
        if letter == "W":
            w += e
        elif letter == "Z":
            z += e
        elif letter == "U":
            u += e
        else:
            t += e
    if s[pos:].strip():
        raise RingError(f"cannot parse monomial {text!r}")
    has_t = bool(re.search("T", s))
    has_wz = bool(re.search("[WZ]", s))
    if has_t and has_wz:
        raise RingError(f"mixed idempotents in {text!r}")
    kind = idem if idem is not None else (1 if has_t else 0)
    if kind == 0:
        if has_t:
            raise RingError(f"T in idempotent-0 monomial {text!r}")
        return mono(w + u, z + u)
    if has_wz:
        raise RingError(f"W/Z in idempotent-1 monomial {text!r}")
    return mono_ut(u, t)


class RingElement:
    """A finite GF(2) sum of monomials sharing one idempotent."""

    __slots__ = ("terms", "idem")

    def __init__(self, terms: Iterable[Monomial] = (), idem: int = 0) -> None:
        acc: set[Monomial] = set()
        for m in terms:
            if m.idem != idem:
                raise RingError("idempotent mismatch in ring element")
            acc ^= {m}
        self.terms = frozenset(acc)
        self.idem = idem

    @classmethod
    def of(cls, m: Monomial) -> RingElement:
        return cls((m,), m.idem)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __iter__(self) -> Iterator[Monomial]:
        return iter(sorted(self.terms))

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.terms == other.terms and (self.idem == other.idem or not self.terms)

    def __hash__(self) -> int:
        return hash(self.terms)

    def __add__(self, other: RingElement) -> RingElement:
        if other.terms and self.terms and other.idem != self.idem:
            raise RingError("idempotent mismatch in sum")
        idem = self.idem if self.terms else other.idem
        out = RingElement((), idem)
        out.terms = self.terms ^ other.terms  # type: ignore[misc]
        return out

    def __mul__(self, other: RingElement | Monomial) -> RingElement:
        if isinstance(other, Monomial):
            return RingElement((mul(m, other) for m in self.terms), other.idem)
        return RingElement((mul(a, b) for a in self.terms for b in other.terms), self.idem)

    def __repr__(self) -> str:
        return f"RingElement({format_element(self)!r})"

    def __str__(self) -> str:
        return format_element(self)


ZERO = RingElement()


def format_element(x: RingElement) -> str:
    if not x.terms:
        return "0"
    return " + ".join(format_monomial(m) for m in sorted(x.terms))


def parse_element(text: str, idem: int | None = None) -> RingElement:
    s = text.strip()
    if s == "0":
        return RingElement((), idem or 0)
    ms = [parse_monomial(part, idem) for part in s.split("+")]
    kinds = {m.idem for m in ms}
    if len(kinds) > 1:
        raise RingError(f"mixed idempotents in {text!r}")
    return RingElement(ms, kinds.pop())


def half_str(x2: int) -> str:
    """Render a doubled half-integer as ``3/2`` or ``-1``."""
    return str(x2 // 2) if x2 % 2 == 0 else f"{x2}/2"


def parse_half(text: str | int | float | Fraction) -> int:
    """Parse ``"3/2"``, ``1.5`` or ``-1`` into a doubled integer."""
    value = Fraction(str(text)) if not isinstance(text, Fraction) else text
    doubled = value * 2
    if doubled.denominator != 1:
        raise RingError(f"{text!r} is not a half-integer")
    return int(doubled)
