"""
Γ and the Frøyshov invariant.
"""

from fractions import Fraction

import pytest

from instanton.algebra import EPSILON, RingSpec
from instanton.invariants import (INFINITY, GammaFunction, HBounds, UnpinnedVError, format_value, gamma,
                                  gamma_closed_form_atoms, gamma_function, h_bounds, h_field, h_signature_rule, h_t4)
from instanton.knots import DoubleTwist, Mirror, Sum, Torus, TwoBridge, Unknot, multiple
from instanton.matrix import sparse
from instanton.scomplex import Bigrading, SComplex, VArrow, atom, dual, tensor, trivial_complex
from instanton.twobridge import torus_two_bridge_complex


def test_infinity_and_rendering():
    assert INFINITY > Fraction(10 ** 9)
    assert not INFINITY < Fraction(0)
    assert INFINITY == INFINITY
    assert max(Fraction(3), INFINITY) is INFINITY
    assert format_value(INFINITY) == "inf"
    assert format_value(Fraction(6, 4)) == "3/2"
    assert format_value(Fraction(4, 2)) == "2"


def test_gamma_of_an_atom():
    C = atom(Fraction(3, 5))
    assert gamma(C, 1) == Fraction(3, 5)
    assert gamma(C, 2) == INFINITY
    assert gamma(C, 0) == 0
    assert gamma(C, -3) == 0
    assert gamma(C, 1, RingSpec.CHAR2) == Fraction(3, 5)


def test_gamma_needs_t4_nonzero():
    with pytest.raises(ValueError):
        gamma(atom(1), 1, RingSpec.T4)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_gamma_of_torus_closed_form(k):
    C = torus_two_bridge_complex(k)
    values = gamma_function(C, range(-2, k + 3))
    for i in range(-2, k + 3):
        expected = Fraction(0) if i <= 0 else (INFINITY if i > k else Fraction(i * i, 2 * k + 1))
        assert values[i] == expected
    assert values.is_monotone()


def test_gamma_of_atom_sums_is_the_minimal_subset_sum():
    ts = [Fraction(3, 5), Fraction(1, 3), Fraction(5, 7)]
    C = tensor(tensor(atom(ts[0]), atom(ts[1])), atom(ts[2]))
    for k in range(1, 5):
        assert gamma(C, k) == gamma_closed_form_atoms(ts, k)
    assert gamma_closed_form_atoms(ts, 2) == Fraction(14, 15)
    assert gamma_closed_form_atoms(ts, 4) == INFINITY
    assert gamma_closed_form_atoms(ts, 0) == 0


def test_gamma_function_helpers():
    values = GammaFunction({1: Fraction(1, 3), 2: INFINITY})
    assert values.is_monotone()
    assert values.render() == "Γ(1) = 1/3, Γ(2) = inf"
    assert values.to_dict() == {'1': '1/3', '2': 'inf'}
    assert not GammaFunction({1: Fraction(1), 2: Fraction(1, 2)}).is_monotone()


def test_h_field():
    assert h_field(trivial_complex()) == 0
    assert h_field(atom(Fraction(1, 3))) == 1
    assert h_field(dual(atom(Fraction(1, 3)))) == -1
    assert h_field(tensor(atom(1), atom(1))) == 2
    assert h_field(tensor(atom(1), dual(atom(2)))) == 0
    for k in range(1, 5):
        C = torus_two_bridge_complex(k)
        assert h_field(C) == k
        assert h_field(dual(C)) == -k


def test_h_over_t4_vanishes_on_atoms():
    assert h_field(atom(Fraction(1, 3)), RingSpec.T4) == 0
    assert h_field(atom(Fraction(1, 3)), RingSpec.CHAR2) == 1


def test_h_t4():
    assert h_t4(Torus(3, 4)) == 1
    assert h_t4(Torus(2, 3)) == 0
    assert h_t4(Torus(2, 9)) == 0
    assert h_t4(TwoBridge(51, 16)) == 0
    assert h_t4(Unknot()) == 0
    assert h_t4(DoubleTwist(2, 2)) == 0
    for k in range(1, 6):
        assert h_t4(multiple(Torus(3, 4), k)) == k
    assert h_t4(Mirror(Torus(3, 4))) == -1
    assert h_t4(Sum((Torus(3, 4), Mirror(Torus(3, 4))))) == 0


def test_h_signature_rule():
    assert h_signature_rule(TwoBridge(51, 16)) == 3
    assert h_signature_rule(Mirror(Torus(2, 5))) == -2


def unpinned_pair():
    gens = [("a", Bigrading(1, Fraction(1, 5))), ("b", Bigrading(3, Fraction(2, 5)))]
    return SComplex(gens, delta1=sparse((1, 2), {(0, 0): EPSILON}), v_pinned=False, v_support=[VArrow(1, 0)])


def test_h_bracket_follows_the_v_support():
    C = unpinned_pair()
    assert h_bounds(C) == HBounds(1, 2)
    assert h_bounds(dual(C)) == HBounds(-2, -1)
    lonely = SComplex([("a", Bigrading(1, Fraction(1, 3)))], delta1=sparse((1, 1), {(0, 0): EPSILON}),
                      v_pinned=False)
    assert h_bounds(lonely).exact == 1
    assert h_field(lonely) == 1
    assert h_bounds(atom(Fraction(1, 3))) == HBounds(1, 1)


def test_h_and_gamma_refuse_unpinned_complexes():
    C = unpinned_pair()
    with pytest.raises(UnpinnedVError) as excinfo:
        h_field(C)
    assert "[1, 2]" in str(excinfo.value)
    with pytest.raises(UnpinnedVError):
        gamma(C, 1)
    with pytest.raises(UnpinnedVError):
        gamma_function(C, range(1, 3))


def test_h_bounds_rendering_and_membership():
    assert str(HBounds(1, 2)) == "[1, 2]"
    assert str(HBounds(None, -1)) == "[-inf, -1]"
    assert str(HBounds(1, None)) == "[1, inf]"
    assert 5 in HBounds(1, None)
    assert -7 in HBounds(None, -1)
    assert 3 not in HBounds(1, 2)
    assert HBounds(0, 0).exact == 0
    assert HBounds(1, None).exact is None
