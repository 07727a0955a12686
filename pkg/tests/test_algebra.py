"""
Laurent polynomials in Z(T) and the three coefficient rings.
"""

import pytest
from sympy import QQ

from instanton.algebra import (CHAR2_FIELD, EPSILON, LAURENT, RingSpec, T, coerce, epsilon_multiple, laurent,
                               laurent_arith, laurent_from_json, laurent_str, laurent_terms, laurent_to_json,
                               monomial)


def test_laurent_arithmetic():
    assert EPSILON == monomial(2) - monomial(-2)
    assert EPSILON * EPSILON == T ** 4 - 2 + T ** -4
    assert (1 + T) ** 3 == laurent({0: 1, 1: 3, 2: 3, 3: 1})
    assert T ** 3 * monomial(-3) == LAURENT.one
    assert laurent({}) == LAURENT.zero
    assert not (EPSILON - monomial(2) + monomial(-2))


def test_laurent_arith_reduces_in_the_ring():
    assert laurent_arith(EPSILON, EPSILON, 'mul') == T ** -4 - 2 + T ** 4
    assert laurent_arith(EPSILON, 0, 'add', RingSpec.T4) == LAURENT.zero
    assert laurent_arith(1, -T ** 4, 'add', RingSpec.CHAR2) == 1 + T ** 4
    assert laurent_arith(T, None, 'neg') == -T
    with pytest.raises(ValueError):
        laurent_arith(T, T, 'div')


def test_terms_of_laurent_polynomials():
    assert laurent_terms(EPSILON) == {2: 1, -2: -1}
    assert laurent_terms(LAURENT.zero) == {}
    assert laurent_terms(monomial(-3, 5)) == {-3: 5}
    with pytest.raises(ValueError):
        laurent_terms((1 + T) / (1 - T))
    with pytest.raises(ValueError):
        laurent_terms(LAURENT.one / (2 * T))


def test_rendering_and_json():
    p = 3 * T ** -2 + T ** 5 - 7
    assert laurent_str(p) == "3*T^-2 - 7 + T^5"
    assert laurent_str(-T) == "-T"
    assert laurent_str(LAURENT.zero) == "0"
    assert laurent_to_json(p) == {"-2": 3, "0": -7, "5": 1}
    assert laurent_from_json({"-2": 3, "0": -7, "5": 1}) == p


def test_coerce():
    assert coerce(3) == LAURENT.convert(3)
    assert coerce(EPSILON) is EPSILON
    with pytest.raises(TypeError):
        coerce("T")


def test_epsilon_multiples():
    assert epsilon_multiple(EPSILON * 5) == 5
    assert epsilon_multiple(LAURENT.zero) == 0
    assert epsilon_multiple(T ** 2) is None
    assert epsilon_multiple(EPSILON + 1, RingSpec.CHAR2) is None
    assert epsilon_multiple(EPSILON * 3, RingSpec.CHAR2) == 1
    assert epsilon_multiple(EPSILON * 7, RingSpec.T4) == 0


def test_t4_quotient_kills_epsilon():
    assert RingSpec.T4.is_zero(EPSILON)
    assert RingSpec.T4.reduce(1 - T ** 4) == LAURENT.zero
    assert RingSpec.T4.reduce(T ** -1) == T ** 3
    assert not RingSpec.GENERIC.is_zero(EPSILON)
    assert not RingSpec.CHAR2.is_zero(EPSILON)


def test_char2_reduction():
    assert RingSpec.CHAR2.reduce(2 * T + 3) == LAURENT.one
    assert RingSpec.CHAR2.epsilon == T ** 2 + T ** -2
    assert RingSpec.CHAR2.characteristic == 2
    assert RingSpec.GENERIC.characteristic == 0


def test_ring_names():
    assert RingSpec.from_name("generic") is RingSpec.GENERIC
    assert RingSpec.from_name(" T4 ") is RingSpec.T4
    assert RingSpec.from_name("char2-generic") is RingSpec.CHAR2
    assert RingSpec.from_name(RingSpec.T4) is RingSpec.T4
    with pytest.raises(ValueError):
        RingSpec.from_name("q")


def test_field_elements():
    assert RingSpec.T4.field is QQ
    assert RingSpec.T4.field_element(3 * T ** 3 - T ** -1) == QQ(2)
    assert RingSpec.GENERIC.field is LAURENT
    assert RingSpec.GENERIC.field_element(EPSILON) == EPSILON
    assert RingSpec.CHAR2.field is CHAR2_FIELD
    assert RingSpec.CHAR2.field_element(EPSILON) == laurent({2: 1, -2: 1}, CHAR2_FIELD)
    assert RingSpec.CHAR2.field_element(2 * T) == CHAR2_FIELD.zero
