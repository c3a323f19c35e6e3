from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from satcfk.ring import (ONE, Monomial, RingElement, RingError, U0, W, Z, mono, mono_ut, mul,
                         parse_element, parse_half, parse_monomial, phi_sigma, phi_tau, half_str,
                         format_element)

exps = st.integers(min_value=0, max_value=6)
idem0 = st.builds(mono, exps, exps)


def test_mul_examples() -> None:
    assert mul(mono(2, 1), mono(1, 3)) == mono(3, 4)
    assert mul(mono_ut(1, -2), mono_ut(0, 3)) == mono_ut(1, 1)
    assert mul(ONE, Z()) == Z()


def test_mul_idempotent_mismatch() -> None:
    with pytest.raises(RingError):
        mul(W(), mono_ut(0, 1))


def test_phi_examples() -> None:
    assert phi_sigma(mono(2, 3)) == mono_ut(2, 1)
    assert phi_sigma(ONE) == mono_ut(0, 0)
    assert phi_sigma(Z()) == mono_ut(0, 1)
    assert phi_tau(mono(2, 3)) == mono_ut(3, 1)
    assert phi_tau(W()) == mono_ut(0, -1)
    assert phi_tau(ONE) == mono_ut(0, 0)


def test_phi_wrong_idempotent() -> None:
    with pytest.raises(RingError):
        phi_sigma(mono_ut(1, 0))
    with pytest.raises(RingError):
        phi_tau(mono_ut(1, 0))


def test_gradings() -> None:
    assert mono(2, 1).bigrading == (-4, -2)
    assert mono_ut(3, -5).bigrading == (-6, -6)
    assert W().alex == -1 and Z().alex == 1 and U0().alex == 0 and mono_ut(0, 1).alex == 0
    assert mono(1, 3).bigrading.alex2 == 4


def test_negative_exponents_rejected() -> None:
    with pytest.raises(RingError):
        mono(-1, 0)
    with pytest.raises(RingError):
        mono_ut(-1, 0)


def test_string_format() -> None:
    assert str(mono(2, 1)) == "W^2 Z"
    assert str(mono_ut(1, -2)) == "U T^-2"
    assert str(ONE) == "1"
    assert format_element(RingElement()) == "0"
    assert parse_monomial("U^2", 0) == mono(2, 2)
    assert parse_monomial("U T^-1") == mono_ut(1, -1)
    with pytest.raises(RingError):
        parse_monomial("W T")
    with pytest.raises(RingError):
        parse_monomial("W^2 X")


def test_element_is_symmetric_difference() -> None:
    a = parse_element("W + Z")
    b = parse_element("Z + W^2")
    assert a + b == parse_element("W + W^2")
    assert a + a == RingElement()
    assert not RingElement([W(), W()])


def test_half_integers() -> None:
    assert parse_half("3/2") == 3 and parse_half(-1) == -2 and parse_half(0.5) == 1
    assert half_str(-3) == "-3/2" and half_str(4) == "2"
    with pytest.raises(RingError):
        parse_half("1/3")


@given(idem0, idem0)
def test_phi_multiplicative(a: Monomial, b: Monomial) -> None:
    assert phi_sigma(a * b) == phi_sigma(a) * phi_sigma(b)
    assert phi_tau(a * b) == phi_tau(a) * phi_tau(b)


@given(exps)
def test_phi_agree_on_u(k: int) -> None:
    assert phi_sigma(U0(k)) == phi_tau(U0(k)) == mono_ut(k, 0)


@given(idem0, idem0)
def test_bigrading_additive(a: Monomial, b: Monomial) -> None:
    assert (a * b).bigrading == a.bigrading + b.bigrading
    assert (a * b).alex == a.alex + b.alex


@given(st.lists(idem0, max_size=6))
def test_element_string_round_trip(ms: list[Monomial]) -> None:
    x = RingElement(ms)
    assert parse_element(format_element(x), 0) == x
