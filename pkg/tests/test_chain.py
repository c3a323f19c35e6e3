from __future__ import annotations

from collections import Counter

import pytest
from hypothesis import given, strategies as st

from helpers import complex_of, dual, elementary_change, rht, satellite, shuffled, staircase_graph
from satcfk.assembly import GridBuilder, GridIndex, bimodule_for
from satcfk.bimodule import build_bimodule, builtin_pattern
from satcfk.chain import (ChainError, ColumnDiagram, FreeComplex, Morphism, boundary, box_tensor,
                          compose, identity, is_chain_map, iso_check, lift_chain_map, mirror, reduce,
                          solve_null_homotopy, validate, validate_morphism)
from satcfk.companion import builtin_companion
from satcfk.ring import RingElement, U0, W, Z, format_element


# -- validate


def test_validate_rht_staircase() -> None:
    assert validate(rht()).ok


def test_validate_rejects_wrong_weight() -> None:
    bad = complex_of([("a", -1, -1), ("b", -2, 0), ("c", 0, -2)], [("a", "b", "Z"), ("a", "c", "W^2")])
    rep = validate(bad)
    assert not rep.ok and any("grading" in v for v in rep.violations)


def test_validate_empty() -> None:
    assert validate(FreeComplex(())).ok


def test_validate_detects_d_squared() -> None:
    C = complex_of([("x", 1, 1), ("y", 0, 0), ("z", -1, -1)], [("x", "y", "1"), ("y", "z", "1")])
    assert not validate(C).ok


# -- reduce


def test_reduce_cancelling_pair() -> None:
    C = complex_of([("x", 0, 0), ("y", -1, -1)], [("x", "y", "1")])
    assert len(reduce(C).complex) == 0


def test_reduce_reduced_is_identity() -> None:
    red = reduce(rht())
    assert red.complex.diff == rht().diff and len(red.complex) == 3
    assert red.proj == identity(rht())


def test_reduce_cable_to_five_generator_staircase() -> None:
    out = satellite("torus2q", "trefoil-rh", 1, q=2)
    assert len(out) == 5
    assert Counter(format_element(c) for c in out.weights()) == Counter(["W", "Z^2", "W^2", "Z"])


def test_reduce_retraction_data() -> None:
    P = builtin_pattern("whitehead")
    K = builtin_companion("trefoil-rh")
    gb = GridBuilder(bimodule_for(P, K, 0), K, 0)
    C = gb.internal_block(GridIndex("E", 1, 1))
    red = reduce(C, track=True)
    assert validate(red.complex).ok
    assert is_chain_map(red.incl) and is_chain_map(red.proj)
    assert compose(red.proj, red.incl) == identity(red.complex)
    assert boundary(red.homotopy) == identity(C) + compose(red.incl, red.proj)


# -- lift_chain_map


def test_lift_lw_torus2q3() -> None:
    B = build_bimodule(builtin_pattern("torus2q", q=3))
    f = lift_chain_map(B.C(1), B.C(-1), (-2, 0))
    assert f.entries == {"x0": {"x0": RingElement.of(Z())}}


def test_lift_identity() -> None:
    C = staircase_graph([1, 2, 2, 1])
    assert lift_chain_map(C, C, (0, 0)) == identity(C)


def test_lift_lz_whitehead() -> None:
    B = build_bimodule(builtin_pattern("whitehead"))
    f = lift_chain_map(B.C(-2), B.C(0), (0, -2))
    assert f.entries == {"x0": {"x0": RingElement.of(W())}}


def test_lift_no_such_map() -> None:
    C = rht()
    C = FreeComplex(tuple(g.shifted(0, 0, algdeg=1 if g.id == "a" else 0) for g in C.generators), C.diff)
    with pytest.raises(ChainError):
        lift_chain_map(C, C, (2, 2))


def test_lift_composition_agrees_up_to_homotopy() -> None:
    B = build_bimodule(builtin_pattern("mazur"))
    a, b, c = B.C(3), B.C(1), B.C(-1)
    two = compose(lift_chain_map(b, c, (-2, 0)), lift_chain_map(a, b, (-2, 0)))
    direct = lift_chain_map(a, c, (-4, 0))
    solve_null_homotopy(two + direct)


# -- solve_null_homotopy


def test_homotopy_whitehead_zw() -> None:
    B = build_bimodule(builtin_pattern("whitehead"))
    F = compose(B.LZ(-2), B.LW(0)) + identity(B.C(0), U0())
    H = solve_null_homotopy(F)
    assert H.entries == {"x2": {"y1": RingElement.of(W())}}
    assert boundary(H) == F


def test_homotopy_whitehead_wz_other_lift() -> None:
    # with L_W on C_1 lifted through the lower cycle, h_WZ lands on the upper one
    B = build_bimodule(builtin_pattern("whitehead"))
    lw = Morphism(B.C(2), B.C(0), {"x0": {"x2": RingElement.of(Z())}}, (-2, 0))
    assert is_chain_map(lw)
    F = compose(lw, B.LZ(0)) + identity(B.C(0), U0())
    H = solve_null_homotopy(F)
    assert H.entries == {"x0": {"y1": RingElement.of(Z())}}


@pytest.mark.parametrize("q", [1, 2, 3])
def test_homotopy_vanishes_for_torus_links(q: int) -> None:
    B = build_bimodule(builtin_pattern("torus2q", q=q))
    for s in B.s_values()[1:-1]:
        assert B.hWZ(s).is_zero() and B.hZW(s).is_zero()


def test_homotopy_inconsistent() -> None:
    C = rht()
    with pytest.raises(ChainError):
        solve_null_homotopy(identity(C, U0()))


# -- box_tensor


def _cfk_rows(pattern: str, companion: str, n: int = 0, **params) -> GridBuilder:
    P = builtin_pattern(pattern, **params)
    K = builtin_companion(companion)
    return GridBuilder(bimodule_for(P, K, n), K, n)


def test_box_tensor_single_generator() -> None:
    gb = _cfk_rows("torus2q", "unknot", q=2)
    for s2, want in ((-1, -2), (1, 0)):
        blk = gb.internal_block(GridIndex("E", s2, -1))
        col = gb.B.C(-1 + (-1 if s2 < 0 else 1))
        assert len(blk) == len(col) == 1 and blk.num_arrows() == 0


@pytest.mark.parametrize("s2, weights", [(-3, {"1", "W Z"}), (-1, {"1", "W"}), (1, {"1", "Z"}),
                                         (3, {"1", "W Z"})])
def test_box_tensor_rht_rows(s2: int, weights: set[str]) -> None:
    gb = _cfk_rows("torus2q", "trefoil-rh", 1, q=2)
    blk = gb.internal_block(GridIndex("E", s2, -1))
    assert len(blk) == 3 and validate(blk).ok
    assert {format_element(c) for c in blk.weights()} == weights


def test_box_tensor_square_gets_corrector_diagonal() -> None:
    gb = _cfk_rows("whitehead", "figure-eight")
    blk = gb.internal_block(GridIndex("E", -1, 1))
    assert validate(blk).ok
    diag = [(s, t) for s, t, _ in blk.arrows() if s[1] == ("box", 0, "a") and t[1] == ("box", 0, "d")]
    assert diag
    row = gb.rows.e_row(1)
    bare = ColumnDiagram(row.column, row.shift, row.step_w, row.step_z, r_offset2=row.r_offset2)
    assert not validate(box_tensor(gb.K.cfk, bare, -1, "E")).ok


def test_box_tensor_without_pairs_has_no_corrections() -> None:
    gb = _cfk_rows("whitehead", "trefoil-rh")
    row = gb.rows.e_row(1)
    bare = ColumnDiagram(row.column, row.shift, row.step_w, row.step_z, r_offset2=row.r_offset2)
    for s2 in (-3, -1, 1, 3):
        a = box_tensor(gb.K.cfk, row, s2, "E")
        b = box_tensor(gb.K.cfk, bare, s2, "E")
        assert a.diff == b.diff and validate(a).ok


# -- iso_check


def test_iso_permuted_ids() -> None:
    C = satellite("whitehead", "trefoil-rh", 2)
    assert iso_check(C, shuffled(C, 7))


def test_iso_rejects_mirror_knot() -> None:
    C = satellite("torus2q", "trefoil-rh", 1, q=2)
    D = dual(C)
    assert Counter(g.gr for g in C.generators) != Counter(g.gr for g in D.generators)
    assert not iso_check(C, D)


def test_iso_after_change_of_basis() -> None:
    K = builtin_companion("figure-eight").cfk
    C = elementary_change(K, "x0", ("box", 0, "d"))
    assert C.diff != K.diff and validate(C).ok
    assert iso_check(K, C) and iso_check(C, K)


def test_iso_detects_different_differential() -> None:
    a = staircase_graph([1, 2, 2, 1])
    b = staircase_graph([2, 1, 1, 2])
    assert not iso_check(a, b)


# -- properties

outputs = st.sampled_from([
    ("torus2q", "trefoil-rh", 1, {"q": 2}), ("whitehead", "trefoil-rh", 2, {}),
    ("mazur", "trefoil-rh", 0, {}), ("whitehead", "figure-eight", 0, {}),
    ("torus2q", "trefoil-rh", -1, {"q": 2}), ("cable", "trefoil-rh", 0, {"p": 3, "q": 2}),
])


@given(outputs, st.integers(0, 10_000))
def test_iso_invariant_under_relabeling(case, seed: int) -> None:
    pattern, companion, n, params = case
    C = satellite(pattern, companion, n, **params)
    assert iso_check(C, shuffled(C, seed), seed=seed)


@given(outputs, st.data())
def test_iso_invariant_under_basis_change(case, data) -> None:
    pattern, companion, n, params = case
    C = satellite(pattern, companion, n, **params)
    buckets: dict = {}
    for g in C.generators:
        buckets.setdefault((g.gr, g.alex2), []).append(g.id)
    pairs = [(a, b) for ids in buckets.values() for a in ids for b in ids if a != b]
    if not pairs:
        return
    D = C
    for _ in range(data.draw(st.integers(1, 4))):
        i, j = data.draw(st.sampled_from(pairs))
        D = elementary_change(D, i, j)
    assert validate(D).ok
    assert iso_check(C, D)


@given(outputs, st.integers(0, 10_000))
def test_reduce_order_independent_up_to_iso(case, seed: int) -> None:
    pattern, companion, n, params = case
    P = builtin_pattern(pattern, **params)
    K = builtin_companion(companion)
    gb = GridBuilder(bimodule_for(P, K, n), K, n)
    grid = gb.build().complex
    mixed = reduce(shuffled(grid, seed), track=False).complex
    base = satellite(pattern, companion, n, **params)
    assert validate(mixed).ok and iso_check(base, mixed, seed=seed)


@given(st.lists(st.integers(1, 3), min_size=1, max_size=3))
def test_staircase_mirror_symmetry(half: list[int]) -> None:
    steps = []
    for a in half:
        steps.append(a)
    steps = steps + steps[::-1]
    steps = [x for pair in zip(steps[0::2], steps[1::2]) for x in pair]
    C = staircase_graph(steps)
    assert validate(C).ok
    assert iso_check(C, mirror(C)) == (steps == steps[::-1])


@given(st.lists(st.integers(1, 3), min_size=2, max_size=6).filter(lambda s: len(s) % 2 == 0))
def test_reduce_idempotent(steps: list[int]) -> None:
    C = staircase_graph(steps)
    once = reduce(C).complex
    assert reduce(once).complex.diff == once.diff
    assert validate_morphism(reduce(C).incl).ok
