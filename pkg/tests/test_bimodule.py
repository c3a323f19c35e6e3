from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from satcfk.alexander import ONE_POLY, HFunction, knot_h, torus_knot_poly
from satcfk.bimodule import (PatternError, build_bimodule, builtin_pattern, pattern_staircase,
                             staircase_from_slice, verify_bimodule)
from satcfk.assembly import Rows
from satcfk.chain import Morphism, compose, cone, reduce, validate, word_action, zero_map
from satcfk.io import bimodule_to_json
from satcfk.ring import RingElement, W, Z
from satcfk.selftest import BUILTIN_PATTERNS


def _B(name: str, **kw):
    return build_bimodule(builtin_pattern(name, **kw))


def _cycles(C):
    return sorted((g for g in C.generators if g.algdeg == 0), key=lambda g: -g.alex2[-1])


def test_slice_torus2q3() -> None:
    C = _B("torus2q", q=3).C(1)
    assert len(C) == 1 and C.generators[0].grw == -2


def test_slice_whitehead() -> None:
    C = _B("whitehead").C(0)
    assert len(C) == 3 and validate(C).ok
    assert [g.alex2 for g in _cycles(C)] == [(0, 2), (0, -2)]
    assert [g.algdeg for g in C.generators].count(1) == 1


def test_slice_flat_then_slope_one() -> None:
    H = HFunction(0, (-6, 6), (-6, 6), {(s, t): max(0, -t // 2) for s in range(-6, 7, 2) for t in range(-6, 7, 2)})
    C = staircase_from_slice(H, 0)
    assert len(C) == 1 and C.generators[0].grw == 0


def test_pattern_staircase_examples() -> None:
    assert len(pattern_staircase(ONE_POLY)) == 1
    rht = pattern_staircase(torus_knot_poly(2, 3))
    assert len(rht) == 3 and sorted(str(c) for c in rht.weights()) == ["W", "Z"]
    d = torus_knot_poly(2, 5)
    S = pattern_staircase(d)
    assert len(S) == 5 and all(str(c) in ("W", "Z") for c in S.weights())
    for g in _cycles(S):
        assert g.grw == -2 * knot_h(d, g.alex2[-1] // 2)


def test_pattern_staircase_rejects_non_lspace() -> None:
    with pytest.raises(PatternError):
        pattern_staircase(torus_knot_poly(2, 3) * torus_knot_poly(2, 3))


def test_torus2q3_sigma_tau() -> None:
    B = _B("torus2q", q=3)
    assert B.Lsigma(1).entries == {"x0": {"x0": RingElement.of(W())}}
    assert B.Ltau(1).entries == {"x0": {"x0": RingElement.of(Z(2))}}


def test_whitehead_and_mazur_homotopies() -> None:
    assert _B("whitehead").hZW(0).entries == {"x2": {"y1": RingElement.of(W())}}
    assert _B("mazur").hZW(-1).entries == {"x2": {"y1": RingElement.of(W())}}


@pytest.mark.parametrize("name, params", BUILTIN_PATTERNS)
def test_verify_builtin(name: str, params: dict) -> None:
    rep = verify_bimodule(_B(name, **params))
    assert rep.ok, rep


def test_verify_catches_zeroed_homotopy() -> None:
    B = _B("whitehead")
    B.hWZ = lambda s2: zero_map(B.C(s2), B.C(s2), (-1, -1))  # type: ignore[method-assign]
    rep = verify_bimodule(B)
    assert not rep.ok and any(m.startswith("hWZ") and "boundary" in m for m in rep.failures)


def test_verify_catches_sigma_grading() -> None:
    B = _B("whitehead")
    real = B.Lsigma
    B.Lsigma = lambda s2: Morphism(real(s2).source, real(s2).target, real(s2).entries,  # type: ignore[method-assign]
                                   real(s2).degree + (0, 2))
    rep = verify_bimodule(B)
    assert not rep.ok and any(m.startswith("Lsigma") and "grading" in m for m in rep.failures)


def test_builtin_closed_forms() -> None:
    P = builtin_pattern("torus2q", q=3)
    assert dict(P.delta_l.coeffs) == {(3, 3): 1, (1, 1): 1, (-1, -1): 1} and P.l == 3 and P.delta_p == ONE_POLY
    P = builtin_pattern("whitehead")
    assert dict(P.delta_l.coeffs) == {(2, 2): -1, (2, 0): 1, (0, 2): 1, (0, 0): -1} and P.l == 0
    P = builtin_pattern("cable", p=3, q=2)
    exps = sorted(P.delta_l.coeffs)
    # numerator over denominator: p consecutive t1 t2^q steps
    assert [(b[0] - a[0], b[1] - a[1]) for a, b in zip(exps, exps[1:])] == [(2, 4), (2, 4)]
    assert P.l == 3 and P.delta_p == torus_knot_poly(3, 2)
    assert builtin_pattern("mazur").l == 1


@pytest.mark.parametrize("bad", [("torus2q", {}), ("cable", {"p": 2, "q": 4}), ("ktwobridge", {"m": 0}),
                                 ("trefoil", {})])
def test_builtin_invalid(bad) -> None:
    with pytest.raises(PatternError):
        builtin_pattern(bad[0], **bad[1])


@pytest.mark.parametrize("name, params", BUILTIN_PATTERNS)
def test_sigma_tau_equivalences_past_N(name: str, params: dict) -> None:
    B = _B(name, **params)
    for q in (B.N2, B.N2 + 2):
        assert len(reduce(cone(B.Lsigma(q)), track=False).complex) == 0
        assert len(reduce(cone(B.Ltau(-q)), track=False).complex) == 0


@given(st.sampled_from(BUILTIN_PATTERNS))
def test_bimodule_deterministic(case) -> None:
    name, params = case
    a = bimodule_to_json(_B(name, **params))
    b = bimodule_to_json(_B(name, **params))
    assert a == b


@given(st.sampled_from(BUILTIN_PATTERNS), st.integers(0, 4), st.integers(0, 4))
def test_row_actions_are_u_powers_in_any_order(case, i: int, j: int) -> None:
    """W^i Z^j on a column of the constant row is a pure power of U, independent of order."""
    name, params = case
    B = _B(name, **params)
    D = Rows(B).f_row((B.l - 1) % 2)
    for p2 in range(-5, 6, 2):
        w, q = word_action(D, p2, "W", i)
        wz = compose(word_action(D, q, "Z", j)[0], w)
        z, q = word_action(D, p2, "Z", j)
        zw = compose(word_action(D, q, "W", i)[0], z)
        assert wz == zw
        for row in wz.entries.values():
            for c in row.values():
                (m,) = c.terms
                assert m.a == m.b
