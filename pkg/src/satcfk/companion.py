"""Companion knots: the knot complex together with its sigma/tau arrows into
the idempotent-1 generator."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable

from .alexander import ONE_POLY, LaurentPoly1, knot_h, torus_knot_poly
from .bimodule import PatternError, pattern_staircase
from .chain import ChainError, FreeComplex, Generator, validate
from .ring import RingElement, W, Z, phi_sigma, phi_tau


class CompanionError(ValueError):
    pass


class MirrorCompanionError(CompanionError):
    """Mirrors of L-space knots are outside the supported companion class."""


@dataclass(frozen=True)
class Arrow:
    """An arrow from a generator to the idempotent-1 generator weighted U^u T^k."""

    source: Hashable
    u: int
    t: int


@dataclass
class CompanionData:
    name: str
    cfk: FreeComplex
    sigma: list[Arrow]
    tau_base: list[Arrow]
    genus: int
    boxes: int = 0
    delta: LaurentPoly1 = field(default_factory=lambda: ONE_POLY)

    def sigma_from(self, gid: Hashable) -> list[Arrow]:
        return [a for a in self.sigma if a.source == gid]

    def tau_from(self, gid: Hashable) -> list[Arrow]:
        return [a for a in self.tau_base if a.source == gid]

    def alex2(self, gid: Hashable) -> int:
        return self.cfk.gen(gid).alex2[-1]


def staircase_companion(delta: LaurentPoly1, name: str = "") -> CompanionData:
    """Staircase companion with sigma U^H(A) T^(A-1) and tau U^H(-A) T^(A-1) on cycles."""
    try:
        cfk = pattern_staircase(delta)
    except PatternError as exc:
        raise CompanionError(str(exc)) from None
    sigma, tau = [], []
    for g in cfk.generators:
        if g.algdeg != 0:
            continue
        a = g.alex2[-1] // 2
        sigma.append(Arrow(g.id, knot_h(delta, a), a - 1))
        tau.append(Arrow(g.id, knot_h(delta, -a), a - 1))
    genus = max(g.alex2[-1] for g in cfk.generators) // 2
    out = CompanionData(name or f"staircase[{delta}]", cfk, sigma, tau, genus, 0, delta)
    check_companion(out)
    return out


def _unit_box(tag: int, grw: int, grz: int) -> tuple[list[Generator], dict]:
    top = Generator(("box", tag, "a"), grw, grz, (grw - grz,))
    left = Generator(("box", tag, "b"), grw + 1, grz - 1, (grw - grz + 2,))
    right = Generator(("box", tag, "c"), grw - 1, grz + 1, (grw - grz - 2,))
    bottom = Generator(("box", tag, "d"), grw, grz, (grw - grz,))
    diff = {
        top.id: {left.id: RingElement.of(W()), right.id: RingElement.of(Z())},
        left.id: {bottom.id: RingElement.of(Z())},
        right.id: {bottom.id: RingElement.of(W())},
    }
    return [top, left, right, bottom], diff


def thin_companion(delta: LaurentPoly1 | None, boxes: list[tuple[tuple[int, int], int] | tuple[int, int]],
                   name: str = "") -> CompanionData:
    """Staircase plus unit boxes. Each box is placed by the bigrading of its top
    generator, optionally with its Alexander grading for a consistency check."""
    if delta is None:
        raise CompanionError("a staircase summand is required to carry the sigma/tau arrows")
    stair = staircase_companion(delta)
    if not boxes:
        stair.name = name or stair.name
        return stair
    gens = list(stair.cfk.generators)
    diff = {s: dict(r) for s, r in stair.cfk.diff.items()}
    for k, spec in enumerate(boxes):
        if isinstance(spec[0], tuple):
            (grw, grz), alex = spec  # type: ignore[misc]
            if grw - grz != 2 * alex:
                raise CompanionError(f"box {k}: Alexander grading disagrees with bigrading")
        else:
            grw, grz = spec  # type: ignore[misc]
        g, d = _unit_box(k, grw, grz)
        gens.extend(g)
        diff.update(d)
    cfk = FreeComplex(tuple(gens), diff)
    genus = max(g.alex2[-1] for g in gens) // 2
    out = CompanionData(name or f"{stair.name}+{len(boxes)} boxes", cfk, stair.sigma, stair.tau_base,
                        genus, len(boxes), _euler(cfk))
    check_companion(out)
    return out


def _euler(cfk: FreeComplex) -> LaurentPoly1:
    from .alexander import euler_char

    return euler_char(cfk)


def check_companion(K: CompanionData) -> list[str]:
    """Assert the companion invariants; returns the (empty) list of failures or raises."""
    problems = []
    rep = validate(K.cfk)
    if not rep.ok:
        problems.append("complex invalid: " + "; ".join(rep.violations[:3]))
    alex = sorted(g.alex2[-1] for g in K.cfk.generators)
    if alex != sorted(-a for a in alex):
        problems.append("Alexander gradings are not symmetric")
    if K.genus != max(alex) // 2:
        problems.append("genus does not match the top Alexander grading")
    for name, arrows, phi in (("sigma", K.sigma, phi_sigma), ("tau", K.tau_base, phi_tau)):
        for a in arrows:
            if a.source not in K.cfk:
                problems.append(f"{name} arrow from unknown generator {a.source!r}")
            elif a.u < 0:
                problems.append(f"{name} arrow with negative U-power")
        # type-D consistency: differential followed by the arrow must cancel
        for g in K.cfk.generators:
            acc: dict[tuple[int, int], int] = {}
            for x, coef in K.cfk.d(g.id).items():
                for arr in arrows:
                    if arr.source != x:
                        continue
                    for m in coef.terms:
                        img = phi(m)
                        key = (img.a + arr.u, img.b + arr.t)
                        acc[key] = acc.get(key, 0) ^ 1
            if any(acc.values()):
                problems.append(f"{name} arrows do not square to zero at {g.id!r}")
    if problems:
        raise CompanionError("; ".join(problems))
    return problems


def builtin_companion(name: str, k: int | None = None) -> CompanionData:
    key = name.lower()
    if key == "unknot":
        return staircase_companion(ONE_POLY, "unknot")
    if key in ("trefoil-rh", "rht", "trefoil"):
        return staircase_companion(torus_knot_poly(2, 3), "trefoil-rh")
    if key in ("torus", "torus2k"):
        if k is None or k % 2 == 0 or k < 1:
            raise CompanionError("torus(2,k) needs odd k >= 1")
        return staircase_companion(torus_knot_poly(2, k), f"torus(2,{k})")
    if key in ("figure-eight", "figure8", "4_1"):
        return thin_companion(ONE_POLY, [((0, 0), 0)], "figure-eight")
    raise CompanionError(f"unknown companion {name!r}")


def _is_mirror_staircase(cfk: FreeComplex) -> bool:
    """A complex whose cycles sit at algebraic degree one, i.e. arrows point outward."""
    if len(cfk) < 3:
        return False
    outdeg = {g.id: len(cfk.d(g.id)) for g in cfk.generators}
    indeg: dict = {}
    for s, row in cfk.diff.items():
        for t in row:
            indeg[t] = indeg.get(t, 0) + 1
    sources = [g for g in cfk.generators if outdeg[g.id] and not indeg.get(g.id)]
    sinks = [g for g in cfk.generators if indeg.get(g.id) and not outdeg[g.id]]
    # boxes balance; a mirrored staircase has fewer sinks than sources
    return len(sinks) < len(sources) and all(outdeg[g.id] <= 2 for g in cfk.generators)


def reject_mirror(cfk: FreeComplex) -> None:
    if _is_mirror_staircase(cfk):
        raise MirrorCompanionError("mirror of an L-space knot: no assembly recipe available")


def companion_from_parts(name: str, cfk: FreeComplex, sigma: list[Arrow], tau: list[Arrow],
                         boxes: int = 0) -> CompanionData:
    reject_mirror(cfk)
    genus = max((g.alex2[-1] for g in cfk.generators), default=0) // 2
    out = CompanionData(name, cfk, sigma, tau, genus, boxes, _euler(cfk))
    check_companion(out)
    return out


def load_companion(data: dict) -> CompanionData:
    """Companion from its JSON form: the complex schema plus sigma/tauBase lists."""
    from .io import SchemaError, complex_from_json

    cfk = complex_from_json(data)
    try:
        sigma = [Arrow(_key(a["from"]), int(a["u"]), int(a["t"])) for a in data.get("sigma", [])]
        tau = [Arrow(_key(a["from"]), int(a["u"]), int(a["t"])) for a in data.get("tauBase", [])]
        boxes = int(data.get("boxes", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad arrow record: {exc}") from None
    return companion_from_parts(str(data.get("name", "companion")), cfk, sigma, tau, boxes)


def _key(raw):
    return tuple(raw) if isinstance(raw, list) else raw


def companion_to_json(K: CompanionData) -> dict:
    from .io import complex_to_json

    out = complex_to_json(K.cfk)
    out["name"] = K.name
    if K.boxes:
        out["boxes"] = K.boxes
    out["sigma"] = [{"from": a.source, "u": a.u, "t": a.t} for a in K.sigma]
    out["tauBase"] = [{"from": a.source, "u": a.u, "t": a.t} for a in K.tau_base]
    return out


__all__ = [
    "load_companion",
    "companion_to_json",
    "Arrow",
    "CompanionData",
    "CompanionError",
    "MirrorCompanionError",
    "builtin_companion",
    "check_companion",
    "companion_from_parts",
    "staircase_companion",
    "thin_companion",
    "ChainError",
]
