"""
2-bridge complexes from lens-space lattice counts.
"""

import random
from fractions import Fraction

import pytest

from instanton.invariants import INFINITY, UnpinnedVError, gamma, h_bounds, h_field
from instanton.knots import DoubleTwist, Mirror, Torus, TwoBridge, Unknot, multiple, signature
from instanton.matrix import is_zero, nonzero_entries
from instanton.scomplex import Bigrading, euler_characteristic, validate
from instanton.twobridge import (Relation, TwoBridgeError, build_two_bridge_complex, catalog_complex,
                                 gamma_lower_bound_two_bridge, lattice_counts, lemma_trivial_window,
                                 predicted_three_element_windows, relations, three_element_windows,
                                 torus_two_bridge_complex, two_bridge_catalog, two_bridge_skeleton)

FIGURE_15_4 = [(2, Fraction(11, 15)), (3, Fraction(14, 15)), (1, Fraction(9, 15)), (2, Fraction(11, 15)),
               (4, Fraction(20, 15)), (5, Fraction(21, 15)), (3, Fraction(14, 15))]


@pytest.mark.parametrize("args,counts", [
    ((1, 1, 15, 4), (1, 0)),
    ((3, 3, 15, 4), (1, 0)),
    ((1, 3, 5, 4), (1, 2)),
    ((1, 3, 3, 2), (1, 6)),
])
def test_lattice_counts(args, counts):
    assert lattice_counts(*args) == counts


def test_lattice_count_parities():
    """N1 is odd and N2 even: the box and the lattice are symmetric under negation."""
    rng = random.Random(7)
    for _ in range(10_000):
        p = rng.randrange(3, 200, 2)
        q = rng.randrange(1, p)
        k1, k2 = rng.randint(1, 25), rng.randint(1, 25)
        n1, n2 = lattice_counts(k1, k2, p, q)
        assert n1 % 2 == 1
        assert n2 % 2 == 0


def test_even_relations_are_kept_but_not_arrows():
    rels = relations(15, 4)
    assert Relation(0, 1, 1, 4, 1, 0, 15) in rels
    even = [rel for rel in rels if rel.is_arrow and not rel.odd]
    assert even
    assert all(rel.i != rel.j for rel in rels)


def test_complex_15_4():
    C = build_two_bridge_complex(15, 4, allow_even=True)
    assert C.rank == 7
    assert C.gradings() == [Bigrading(z, t) for z, t in FIGURE_15_4]
    assert is_zero(C.delta2)
    assert [C.name(c) for _, c, _ in nonzero_entries(C.delta1)] == ["z3"]
    assert {(C.name(r), C.name(s)) for s, r, _ in nonzero_entries(C.d)} == {
        ("z6", "z5"), ("z2", "z1"), ("z7", "z4")}
    assert validate(C).ok
    assert not C.v_pinned
    assert is_zero(C.v)
    assert C.v_support
    assert 1 in h_bounds(C)
    assert h_bounds(C).lower == 1
    assert euler_characteristic(C) == signature(TwoBridge(15, 4)) // 2


def test_even_relations_abort_unless_allowed():
    with pytest.raises(TwoBridgeError) as excinfo:
        build_two_bridge_complex(15, 4)
    assert "(k1,k2) = (1,4)" in str(excinfo.value)
    with pytest.raises(TwoBridgeError):
        two_bridge_skeleton(15, 4)
    skeleton = two_bridge_skeleton(15, 4, allow_even=True)
    assert (0, 1, 1, 4) in skeleton.even_relations
    C = build_two_bridge_complex(15, 4, allow_even=True)
    assert [0, 1, 1, 4] in C.notes['even_relations']
    assert catalog_complex(TwoBridge(15, 4)).notes == C.notes


def test_unpinned_complexes_refuse_gamma_and_exact_h():
    C = build_two_bridge_complex(51, 16, allow_even=True)
    with pytest.raises(UnpinnedVError):
        gamma(C, 1)
    bounds = h_bounds(C)
    assert -signature(TwoBridge(51, 16)) // 2 in bounds
    if bounds.exact is None:
        with pytest.raises(UnpinnedVError):
            h_field(C)
    else:
        assert h_field(C) == bounds.exact


def test_skeleton_gradings_51_16():
    skeleton = two_bridge_skeleton(51, 16, allow_even=True)
    assert skeleton.gradings[2] == Bigrading(1, Fraction(9, 51))
    assert skeleton.gradings[5] == Bigrading(3, Fraction(36, 51))
    assert skeleton.gradings[8] == Bigrading(5, Fraction(81, 51))


def test_lower_bound_chain_51_16():
    bounds = [gamma_lower_bound_two_bridge(51, 16, ell).value for ell in (1, 2, 3)]
    assert bounds == [Fraction(3, 17), Fraction(12, 17), Fraction(27, 17)]
    assert gamma_lower_bound_two_bridge(51, 16, 4).value == INFINITY


@pytest.mark.parametrize("p,q,value", [
    (57, 10, Fraction(62, 57)),
    (61, 42, Fraction(62, 61)),
    (97, 26, Fraction(104, 97)),
])
def test_unknotting_number_three_lower_bounds(p, q, value):
    assert gamma_lower_bound_two_bridge(p, q, 2).value == value


def test_lower_bound_edge_cases():
    assert gamma_lower_bound_two_bridge(15, 4, 1).value == Fraction(3, 5)
    beyond = gamma_lower_bound_two_bridge(15, 4, 2)
    assert beyond.value == INFINITY and beyond.exact
    with pytest.raises(ValueError):
        gamma_lower_bound_two_bridge(15, 4, 0)


def test_torus_pairs_use_the_closed_form():
    for k in range(1, 6):
        C = build_two_bridge_complex(2 * k + 1, 2 * k)
        assert C.same_structure(torus_two_bridge_complex(k))
        assert C.v_pinned
        assert C.gradings() == [Bigrading(2 * i - 1, Fraction(i * i, 2 * k + 1)) for i in range(1, k + 1)]


def test_invalid_parameters():
    with pytest.raises(TwoBridgeError):
        build_two_bridge_complex(16, 3)
    with pytest.raises(TwoBridgeError):
        relations(15, 5)
    with pytest.raises(ValueError):
        torus_two_bridge_complex(-1)


CATALOG_BY_P = {}
for _knot in two_bridge_catalog(99):
    CATALOG_BY_P.setdefault(_knot.p, []).append(_knot)


@pytest.mark.parametrize("p", sorted(CATALOG_BY_P))
def test_catalog_complexes_are_valid(p):
    for knot in CATALOG_BY_P[p]:
        C = catalog_complex(knot)
        assert validate(C).ok, knot.render()
        assert C.rank == (knot.p - 1) // 2
        assert euler_characteristic(C) == signature(knot) // 2
        assert -signature(knot) // 2 in h_bounds(C), knot.render()
        if knot.is_torus:
            assert h_field(C) == -signature(knot) // 2


def test_catalog_dispatch():
    assert catalog_complex(Unknot()).rank == 0
    local = catalog_complex(DoubleTwist(2, 2), local=True)
    assert local.rank == 1 and local.idegree(0) == Fraction(3, 5)
    assert catalog_complex(DoubleTwist(2, 2)).rank == 7
    assert catalog_complex(Torus(2, 7)).same_structure(torus_two_bridge_complex(3))
    mirrored = catalog_complex(Mirror(Torus(2, 3)))
    assert mirrored.label == "mirror:torus:2,3"
    assert h_field(mirrored) == -1
    assert catalog_complex(multiple(DoubleTwist(1, 2), 2), local=True).rank == 4
    with pytest.raises(ValueError):
        catalog_complex(Torus(3, 4))


@pytest.mark.parametrize("m", range(1, 6))
@pytest.mark.parametrize("n", range(1, 6))
def test_double_twist_lattice_lemmas(m, n):
    p = 4 * m * n - 1
    assert all(lemma_trivial_window(m, n, k1, k2) for k1 in range(1, p + 1, 2) for k2 in range(1, p + 1, 2))
    assert three_element_windows(m, n) == predicted_three_element_windows(m, n)
