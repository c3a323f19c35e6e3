"""Replayable acceptance checks over the bundled fixtures and the independent oracles."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from importlib import resources
from typing import Callable

from .alexander import (ONE_POLY, LaurentPoly1, compute_N, euler_char, torus_knot_poly,
                        verify_N)
from .assembly import assemble_and_reduce, build_grid, bimodule_for
from .bimodule import PatternData, build_bimodule, builtin_pattern, verify_bimodule
from .chain import FreeComplex, iso_check, mirror, reduce, validate
from .closed_forms import check_phi_closed_forms, thin_prediction, unknot_zigzag
from .companion import CompanionData, builtin_companion
from .gradings import complex_from_graph, is_normalized
from .ring import format_element

BUILTIN_PATTERNS: list[tuple[str, dict]] = [
    ("torus2q", {"q": 2}), ("torus2q", {"q": 3}), ("torus2q", {"q": 4}),
    ("whitehead", {}), ("mazur", {}), ("cable", {"p": 3, "q": 2}),
    ("ktwobridge", {"m": 2}), ("ktwobridge", {"m": 3}),
]


@dataclass
class CriterionResult:
    number: int
    title: str
    ok: bool
    detail: str
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"[{status}] criterion {self.number:2d}: {self.title} ({self.detail}; {self.seconds:.2f}s)"


# ---------------------------------------------------------------------------
# fixtures


def fixture_names() -> list[str]:
    return sorted(p.name for p in resources.files("satcfk").joinpath("data").iterdir()
                  if p.name.endswith(".json"))


def load_fixture(name: str) -> dict:
    return json.loads(resources.files("satcfk").joinpath("data", name).read_text(encoding="utf-8"))


def pattern_from_spec(spec: dict) -> PatternData:
    spec = dict(spec)
    return builtin_pattern(spec.pop("builtin"), **spec)


def fixture_complex(doc: dict) -> FreeComplex:
    """Reduced complex of a bare-graph fixture, absolute gradings from the tower tops."""
    return reduce(complex_from_graph(doc["vertices"], doc["arrows"]), track=False).complex


def matches_fixture(name: str, seed: int = 0) -> tuple[bool, str]:
    doc = load_fixture(name)
    P = pattern_from_spec(doc["pattern"])
    K = builtin_companion(doc["companion"])
    want = fixture_complex(doc)
    got = assemble_and_reduce(P, K, doc["framing"])
    ok = len(want) == len(got) and iso_check(want, got, seed=seed)
    return ok, f"{name}: {len(got)} vs {len(want)} generators"


# ---------------------------------------------------------------------------
# oracles


def satellite_euler_oracle(P: PatternData, K: CompanionData, n: int) -> LaurentPoly1:
    """Delta_K(t^l) times the Euler characteristic of the unknot-companion output."""
    base = euler_char(assemble_and_reduce(P, builtin_companion("unknot"), n))
    return (K.delta.substitute_power(P.l) * base).normalized()


def cable_euler_oracle(p: int, q: int, K: CompanionData, n: int) -> LaurentPoly1:
    """Delta_K(t^p) Delta_{T(p, q + pn)}(t) for the (p,q)-cable pattern at framing n."""
    q2 = abs(q + p * n)
    torus = ONE_POLY if p == 1 or q2 == 1 else torus_knot_poly(p, q2)
    return (K.delta.substitute_power(p) * torus).normalized()


def cable_parameters(P: PatternData) -> tuple[int, int] | None:
    if P.name.startswith("torus2q("):
        return P.l, 1
    if P.name.startswith("cable("):
        p, q = P.name[6:-1].split(",")
        return int(p), int(q)
    return None


def property_violations(P: PatternData, K: CompanionData, n: int, *, path_b: bool = False,
                        seed: int = 0) -> list[str]:
    """Grid d^2, output symmetry, Euler oracle and (optionally) Path-B agreement."""
    bad: list[str] = []
    grid = build_grid(P, K, n)
    rep = validate(grid.complex)
    if not rep.ok:
        bad.append(f"grid: {rep.violations[0]}")
    out = reduce(grid.complex, track=False).complex
    if not iso_check(out, mirror(out), seed=seed):
        bad.append("output is not symmetric")
    if not is_normalized(out):
        bad.append("tower tops are not at zero")
    chi = euler_char(out).normalized()
    cab = cable_parameters(P)
    want = cable_euler_oracle(*cab, K, n) if cab else satellite_euler_oracle(P, K, n)
    if chi != want:
        bad.append(f"Euler characteristic {chi} != {want}")
    if path_b:
        other = reduce(build_grid(P, K, n, mode="solver").complex, track=False).complex
        if not (len(other) == len(out) and iso_check(out, other, seed=seed)):
            bad.append("Path-B assembly disagrees")
    return bad


# ---------------------------------------------------------------------------
# criteria


def _h_fixture_ok(name: str) -> tuple[bool, str]:
    doc = load_fixture(name)
    P = pattern_from_spec(doc["pattern"])
    B = build_bimodule(P)
    wrong = [(s, t) for s, t, h in doc["cells"] if B.H(s, t) != h]
    return not wrong, f"{name}: {len(doc['cells'])} cells, {len(wrong)} wrong"


def criterion_1(seed: int = 0) -> tuple[bool, str]:
    res = [_h_fixture_ok(f"h_{k}.json") for k in ("torus2q_3", "whitehead", "mazur")]
    return all(r[0] for r in res), "; ".join(r[1] for r in res)


def criterion_2(seed: int = 0) -> tuple[bool, str]:
    want = [(builtin_pattern("torus2q", q=q), q) for q in range(1, 7)]
    want += [(builtin_pattern("whitehead"), 2), (builtin_pattern("mazur"), 3)]
    bad = []
    for P, n2 in want:
        got = compute_N(P.delta_l)
        if got != n2:
            bad.append(f"{P.name}: N2={got}")
        elif n2 > 1 and not verify_N(build_bimodule(P), n2):
            bad.append(f"{P.name}: verify_N rejects {n2}/2")
    return not bad, "; ".join(bad) or f"{len(want)} patterns"


def criterion_3(seed: int = 0) -> tuple[bool, str]:
    bad, slow = [], []
    for name, kw in BUILTIN_PATTERNS:
        t0 = time.perf_counter()
        rep = verify_bimodule(build_bimodule(builtin_pattern(name, **kw)))
        dt = time.perf_counter() - t0
        if not rep:
            bad.append(f"{name}{kw}: {rep.failures[0]}")
        if dt > 1.0:
            slow.append(f"{name}{kw}: {dt:.2f}s")
    return not bad and not slow, "; ".join(bad + slow) or f"{len(BUILTIN_PATTERNS)} patterns"


def criterion_4(seed: int = 0) -> tuple[bool, str]:
    U = builtin_companion("unknot")
    bad = []
    for name, kw in BUILTIN_PATTERNS:
        P = builtin_pattern(name, **kw)
        B = build_bimodule(P)
        for n in (-1, 0, 1):
            want = reduce(unknot_zigzag(B, n), track=False).complex
            got = assemble_and_reduce(P, U, n)
            if not (len(want) == len(got) and iso_check(want, got, seed=seed)):
                bad.append(f"{P.name} n={n}")
        S = assemble_and_reduce(P, U, 0)
        if len(S) != len(B.S):
            bad.append(f"{P.name}: n=0 is not the pattern staircase")
    return not bad, "; ".join(bad) or f"{len(BUILTIN_PATTERNS)} patterns x n in -1..1"


def _fixture_group(names: list[str], seed: int) -> tuple[bool, str]:
    res = [matches_fixture(n, seed) for n in names]
    bad = [r[1] for r in res if not r[0]]
    return not bad, "; ".join(bad) or f"{len(names)} fixtures"


def criterion_5(seed: int = 0) -> tuple[bool, str]:
    names = [f"cable_2_{2 * n + 1}_n{n}.json" for n in range(-2, 4)]
    ok, detail = _fixture_group(names, seed)
    C = assemble_and_reduce(builtin_pattern("torus2q", q=2), builtin_companion("trefoil-rh"), 1)
    weights = sorted(format_element(c) for _, _, c in C.arrows())
    if len(C) != 5 or weights != sorted(["W", "Z^2", "W^2", "Z"]):
        ok, detail = False, f"{detail}; n=1 gives {len(C)} generators with {weights}"
    return ok, detail


def criterion_6(seed: int = 0) -> tuple[bool, str]:
    return _fixture_group([f"whitehead_n{n}.json" for n in range(-1, 6)], seed)


def criterion_7(seed: int = 0) -> tuple[bool, str]:
    return _fixture_group([f"mazur_n{n}.json" for n in range(-1, 3)], seed)


def criterion_8(seed: int = 0) -> tuple[bool, str]:
    ok1, d1 = _h_fixture_ok("h_cable_3_2.json")
    ok2, d2 = matches_fixture("cable_3_2_n0.json", seed)
    return ok1 and ok2, f"{d1}; {d2}"


def criterion_9(seed: int = 0) -> tuple[bool, str]:
    K = builtin_companion("figure-eight")
    bad = []
    for name in ("whitehead", "mazur"):
        P = builtin_pattern(name)
        for n in (-1, 0, 1):
            want = thin_prediction(P, n)
            got = assemble_and_reduce(P, K, n)
            if not (len(want) == len(got) and iso_check(want, got, seed=seed)):
                bad.append(f"{name} n={n}: {len(got)} vs {len(want)}")
    return not bad, "; ".join(bad) or "6 cases"


PROPERTY_CASES: list[tuple[str, dict, str, int]] = (
    [("torus2q", {"q": 2}, "trefoil-rh", n) for n in range(-2, 4)]
    + [("whitehead", {}, "trefoil-rh", n) for n in range(-1, 3)]
    + [("mazur", {}, "trefoil-rh", n) for n in range(-1, 3)]
    + [("cable", {"p": 3, "q": 2}, "trefoil-rh", 0)]
    + [(p, {}, "figure-eight", n) for p in ("whitehead", "mazur") for n in (-1, 0, 1)]
    + [("torus2q", {"q": 3}, "unknot", n) for n in (-1, 0, 1)]
)


def criterion_10(seed: int = 0) -> tuple[bool, str]:
    bad = []
    for name, kw, comp, n in PROPERTY_CASES:
        P = builtin_pattern(name, **kw)
        K = builtin_companion(comp)
        small = K.genus <= 1 and P.N2 <= 3
        for v in property_violations(P, K, n, path_b=small, seed=seed):
            bad.append(f"{P.name}/{comp}/n={n}: {v}")
    return not bad, "; ".join(bad[:4]) or f"{len(PROPERTY_CASES)} cases"


def criterion_11(seed: int = 0) -> tuple[bool, str]:
    P = builtin_pattern("torus2q", q=2)
    total, bad = 0, []
    for K in (builtin_companion("trefoil-rh"), builtin_companion("torus", 5)):
        for n in (-1, 0, 1, 2):
            res = check_phi_closed_forms(P, K, n)
            total += len(res)
            bad.extend(f"{K.name} n={n} {r.kind} {r.source}: {r.detail}" for r in res if not r.ok)
    return not bad and total > 0, "; ".join(bad[:4]) or f"{total} block maps"


CRITERIA: list[tuple[int, str, Callable[[int], tuple[bool, str]]]] = [
    (1, "H-function tables", criterion_1),
    (2, "truncation bound N", criterion_2),
    (3, "bimodule relations", criterion_3),
    (4, "unknot companion closed forms", criterion_4),
    (5, "cables of the right-handed trefoil", criterion_5),
    (6, "Whitehead doubles", criterion_6),
    (7, "Mazur satellites", criterion_7),
    (8, "(3,2)-cable pattern", criterion_8),
    (9, "figure-eight splitting", criterion_9),
    (10, "property suite", criterion_10),
    (11, "staircase Phi closed forms", criterion_11),
]


def run_criterion(number: int, seed: int = 0) -> CriterionResult:
    for num, title, fn in CRITERIA:
        if num == number:
            t0 = time.perf_counter()
            try:
                ok, detail = fn(seed)
            except Exception as exc:  # report, do not mask
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            return CriterionResult(num, title, ok, detail, time.perf_counter() - t0)
    raise KeyError(number)


def run_all(seed: int = 0) -> list[CriterionResult]:
    return [run_criterion(num, seed) for num, _, _ in CRITERIA]
