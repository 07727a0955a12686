"""
S-complex axioms, tensor products, duals and the JSON schema.
"""

import random
from fractions import Fraction

import pytest

from instanton.algebra import EPSILON, LAURENT, RingSpec, T
from instanton.matrix import is_zero, sparse
from instanton.scomplex import (V_RELATION, Bigrading, InvalidComplexError, Morphism, RingMismatchError, SComplex,
                                VArrow, atom, change_ring, dual, dumps, euler_characteristic, from_json,
                                is_epsilon_uniform, loads, require_valid, tensor, tensor_power, to_json,
                                trivial_complex, validate)


def test_atom_is_valid():
    C = atom(Fraction(1, 3))
    assert validate(C).ok
    assert C.rank == 1
    assert C.grading(0) == Bigrading(1, Fraction(1, 3))
    assert euler_characteristic(C) == -1


def test_atom_needs_positive_parameter():
    with pytest.raises(ValueError):
        atom(0)


def test_misplaced_delta1_is_reported_not_raised():
    C = SComplex([("a", Bigrading(2, 1))], delta1=sparse((1, 1), {(0, 0): EPSILON}))
    report = validate(C)
    assert not report.ok
    assert any("δ₁" in violation for violation in report.violations)
    with pytest.raises(InvalidComplexError) as excinfo:
        require_valid(C)
    assert excinfo.value.violations == report.violations


def test_d_must_lower_instanton_grading():
    gens = [("a", Bigrading(2, Fraction(1, 2))), ("b", Bigrading(1, Fraction(3, 4)))]
    C = SComplex(gens, d=sparse((2, 2), {(1, 0): EPSILON}))
    assert any("does not lower" in violation for violation in validate(C).violations)


def test_tensor_of_atoms():
    C = tensor(atom(Fraction(1, 3)), atom(Fraction(3, 5)))
    assert C.rank == 4
    assert validate(C).ok
    assert euler_characteristic(C) == -2
    assert C.grading(C.index_of("z*z")) == Bigrading(2, Fraction(14, 15))


def test_tensor_needs_one_ring():
    with pytest.raises(RingMismatchError):
        tensor(atom(1), atom(1, ring=RingSpec.CHAR2))


def test_tensor_power_counts():
    assert tensor_power(atom(1), 0).rank == 0
    assert tensor_power(atom(1), 3).rank == 13


def test_dual_gradings():
    C = dual(atom(Fraction(1, 3)))
    assert validate(C).ok
    assert C.grading(0) == Bigrading(-2, Fraction(-1, 3))
    assert is_zero(C.delta1)
    assert not is_zero(C.delta2)


def test_random_compositions_stay_valid():
    rng = random.Random(20240611)
    ts = [Fraction(1, 3), Fraction(3, 5), Fraction(5, 7), Fraction(9, 15)]
    for _ in range(20):
        C = trivial_complex()
        for _ in range(rng.randint(1, 3)):
            piece = atom(rng.choice(ts))
            if rng.random() < 0.5:
                piece = dual(piece)
            C = tensor(C, piece)
        if rng.random() < 0.5:
            C = dual(C)
        assert validate(C).ok, validate(C).violations


def test_json_round_trip():
    C = tensor(atom(Fraction(1, 3)), dual(atom(Fraction(3, 5))))
    again = loads(dumps(C))
    assert again.same_structure(C)
    assert [name for name, _ in again.generators] == [name for name, _ in C.generators]
    assert to_json(from_json(to_json(C))) == to_json(C)


def test_malformed_json():
    with pytest.raises(InvalidComplexError):
        loads("{not json")
    with pytest.raises(InvalidComplexError):
        from_json({'generators': [{'name': 'a'}]})


def test_epsilon_uniformity():
    assert is_epsilon_uniform(atom(1))
    odd = SComplex([("z", Bigrading(1, 1))], delta1=sparse((1, 1), {(0, 0): T}))
    assert not is_epsilon_uniform(odd)
    assert not is_epsilon_uniform(change_ring(atom(1), RingSpec.T4))


def test_identity_morphism_is_local():
    C = tensor(atom(Fraction(1, 3)), atom(Fraction(1, 3)))
    identity = Morphism.identity(C)
    assert identity.check(C, C) == []
    assert identity.is_local_map(RingSpec.GENERIC)
    assert not Morphism(identity.lam, identity.mu, identity.Delta1, identity.Delta2,
                        LAURENT.convert(2)).is_local_map(RingSpec.CHAR2)


def unpinned_pair() -> SComplex:
    gens = [("a", Bigrading(1, Fraction(1, 5))), ("b", Bigrading(3, Fraction(2, 5)))]
    return SComplex(gens, delta1=sparse((1, 2), {(0, 0): EPSILON}), v_pinned=False,
                    v_support=[VArrow(1, 0)], label="pair", notes={'even_relations': [[1, 2, 2, 1]]})


def test_unpinned_complex_leaves_the_v_relation_unchecked():
    C = unpinned_pair()
    report = validate(C)
    assert report.ok
    assert report.unchecked == [V_RELATION]
    assert report.to_dict()['unchecked'] == [V_RELATION]
    assert validate(atom(1)).unchecked == []
    assert "v unpinned" in repr(C)


def test_unpinned_flag_survives_tensor_dual_and_json():
    C = unpinned_pair()
    assert not tensor(C, atom(1)).v_pinned
    assert not dual(C).v_pinned
    assert dual(C).notes == C.notes
    again = loads(dumps(C))
    assert not again.v_pinned
    assert again.notes == {'even_relations': [[1, 2, 2, 1]]}
    assert again.v_support == C.v_support
    assert not again.same_structure(atom(1))


def test_morphism_check_refuses_unpinned_complexes():
    C = unpinned_pair()
    with pytest.raises(InvalidComplexError):
        Morphism.identity(C).check(C, C)
