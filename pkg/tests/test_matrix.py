"""
Sparse exact linear algebra on sympy domain matrices.
"""

import pytest
from sympy import GF, QQ, Symbol

from instanton.algebra import EPSILON, LAURENT, RingSpec, T
from instanton.matrix import (column, entries, equal, identity, in_row_span, is_zero, kernel_basis,
                              kernel_over_fraction_field, lattice_functional_gcd, map_entries, nonzero_entries,
                              polynomial_invariant_factors, rank, row, smith_normal_form, solve, sparse)


def test_sparse_construction():
    m = sparse((2, 3), {(0, 2): EPSILON, (1, 0): 0, (1, 1): T})
    assert entries(m) == {(0, 2): EPSILON, (1, 1): T}
    assert nonzero_entries(m) == [(0, 2, EPSILON), (1, 1, T)]
    assert row(m, 0) == {2: EPSILON}
    assert column(m, 1) == {1: T}
    assert is_zero(sparse((3, 3)))
    with pytest.raises(IndexError):
        sparse((1, 1), {(1, 0): 1})


def test_products_and_equality():
    a = sparse((2, 2), {(0, 0): 1, (0, 1): 2, (1, 1): 1}, QQ)
    b = sparse((2, 2), {(0, 0): 1, (0, 1): -2, (1, 1): 1}, QQ)
    assert equal(a.matmul(b), identity(2, QQ))
    assert is_zero(a.sub(a))
    assert not equal(a, b)
    assert not equal(identity(2), identity(3))


def test_map_entries_changes_domain():
    m = sparse((1, 2), {(0, 0): EPSILON * 3, (0, 1): T ** 4 + 1})
    values = map_entries(m, RingSpec.T4.field_element, QQ)
    assert values.domain == QQ
    assert entries(values) == {(0, 1): QQ(2)}


def test_kernel_and_rank_over_q():
    rows = [{0: 1, 1: 1}, {1: 1, 2: -1}]
    assert rank(rows, 3, QQ) == 2
    assert rank([], 3, QQ) == 0
    basis = kernel_basis(rows, 3, QQ)
    assert len(basis) == 1
    vec = basis[0]
    assert all(sum(r.get(c, 0) * vec.get(c, 0) for c in range(3)) == 0 for r in rows)
    assert in_row_span({0: 2, 1: 3, 2: -1}, rows, 3, QQ)
    assert not in_row_span({2: 1}, rows[:1], 3, QQ)


def test_kernel_without_constraints_is_the_standard_basis():
    assert kernel_basis([], 2, QQ) == [{0: QQ.one}, {1: QQ.one}]


def test_kernel_over_gf2():
    basis = kernel_basis([{0: 1, 1: 1}], 2, GF(2))
    assert len(basis) == 1
    assert set(basis[0]) == {0, 1}


def test_kernel_over_the_fraction_field():
    rows = [{0: EPSILON, 1: T ** 4 - 1}]
    basis = kernel_basis(rows, 2, LAURENT)
    assert len(basis) == 1
    x = basis[0].get(0, LAURENT.zero)
    y = basis[0].get(1, LAURENT.zero)
    assert x * EPSILON + y * (T ** 4 - 1) == LAURENT.zero


def test_solve_sets_free_variables_to_zero():
    rows = [{0: 1, 1: 1}]
    assert solve(rows, [3], 2, QQ) == {0: QQ(3)}
    assert solve([{0: 1}, {0: 1}], [1, 2], 1, QQ) is None
    assert solve([{0: 1, 1: 1}, {1: 1}], [1, 1], 2, GF(2)) == {1: GF(2)(1)}


def test_functional_gcd_over_an_integer_kernel():
    # 2 x0 + 4 x1 = 0, 3 x2 = 0: x0 ranges over 2Z
    assert lattice_functional_gcd({0: 1}, [{0: 2, 1: 4}, {2: 3}], 3) == 2
    assert lattice_functional_gcd({0: 4, 1: 6}, [], 2) == 2
    assert lattice_functional_gcd({0: 1}, [{0: 1}], 1) == 0
    assert lattice_functional_gcd({}, [{0: 1}], 2) == 0
    assert lattice_functional_gcd({1: 1}, [{0: 1, 1: -3}], 2) == 1


def test_polynomial_invariant_factors():
    ring = QQ.poly_ring(Symbol('x'))
    x = ring.gens[0]
    factors = polynomial_invariant_factors({(0, 0): x, (0, 1): x, (1, 0): x, (1, 1): x + 1}, (2, 2), ring)
    assert sorted(f.degree() for f in factors if f) == [0, 1]
    diagonal = polynomial_invariant_factors({(0, 0): x, (1, 1): x ** 2}, (2, 2), ring)
    assert sorted(f.degree() for f in diagonal) == [1, 2]
    assert polynomial_invariant_factors({}, (0, 3), ring) == ()


def _annihilates(matrix, vector):
    rows, cols = matrix.shape
    for r in range(rows):
        total = LAURENT.zero
        for c, value in row(matrix, r).items():
            total += value * vector.get(c, LAURENT.zero)
        if total:
            return False
    return True


def test_kernel_over_the_fraction_field_examples():
    """[ε] has no kernel, [ε, -ε] has (1, 1), [[T, 1], [T^2, T]] has (1, -T) up to a scalar."""
    assert kernel_over_fraction_field(sparse((1, 1), {(0, 0): EPSILON})) == []

    m = sparse((1, 2), {(0, 0): EPSILON, (0, 1): -EPSILON})
    (v,) = kernel_over_fraction_field(m)
    assert v[0] == v[1]
    assert _annihilates(m, v)

    m = sparse((2, 2), {(0, 0): T, (0, 1): 1, (1, 0): T ** 2, (1, 1): T})
    (v,) = kernel_over_fraction_field(m)
    assert v[1] == -T * v[0]
    assert _annihilates(m, v)


def test_kernel_count_is_columns_minus_rank():
    m = sparse((2, 4), {(0, 0): 1, (0, 2): T, (1, 1): EPSILON, (1, 3): 1})
    basis = kernel_over_fraction_field(m)
    assert len(basis) == 2
    assert all(_annihilates(m, v) for v in basis)


def test_smith_normal_form():
    assert smith_normal_form({(0, 0): 1, (1, 1): 1}, (2, 2)) == (1, 1)
    assert smith_normal_form({(0, 0): 2, (1, 1): 3}, (2, 2)) == (1, 6)
    assert smith_normal_form({}, (1, 1)) == (0,)
    assert smith_normal_form({(0, 0): 2, (0, 1): 4, (1, 0): 6, (1, 1): 12}, (2, 3)) == (2, 0)
    assert smith_normal_form({}, (0, 2)) == ()
