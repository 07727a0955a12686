"""
Knot expressions and signatures.
"""

import pytest

from instanton.knots import (DoubleTwist, KnotSyntaxError, Mirror, Sum, Torus, TwoBridge, Unknot, leaves,
                             multiple, murasugi_signature, parse_knot_expr, signature, slice_genus_hint,
                             torus_lattice_signature, torus_signature, two_bridge_signature)
from instanton.twobridge import two_bridge_catalog


def test_parse_examples():
    assert parse_knot_expr("torus:2,7") == Torus(2, 7)
    assert parse_knot_expr("5x(dtwist:2,2)") == Sum((DoubleTwist(2, 2),) * 5)
    assert parse_knot_expr("mirror:twobridge:15,4") == Mirror(TwoBridge(15, 4))
    assert parse_knot_expr(" unknot ") == Unknot()
    assert parse_knot_expr("sum:torus:2,3+mirror:(torus:2,3)") == Sum((Torus(2, 3), Mirror(Torus(2, 3))))


def test_normalisation():
    assert TwoBridge(15, 19).q == 4
    assert Torus(7, 2) == Torus(2, 7)
    assert Torus(1, 5).is_unknot
    assert DoubleTwist(2, 2).as_two_bridge() == TwoBridge(15, 4)


@pytest.mark.parametrize("text", [
    "torus:2,7",
    "5x(dtwist:2,2)",
    "mirror:twobridge:15,4",
    "sum:torus:2,3+dtwist:1,2+mirror:(sum:unknot+twobridge:5,2)",
])
def test_render_parses_back(text):
    knot = parse_knot_expr(text)
    assert parse_knot_expr(knot.render()) == knot


@pytest.mark.parametrize("text,column", [
    ("torus:2", 8),
    ("knot:1,2", 1),
    ("twobridge:15,5", 11),
    ("3(torus:2,3)", 2),
    ("torus:2,3)", 10),
])
def test_syntax_errors_carry_a_column(text, column):
    with pytest.raises(KnotSyntaxError) as excinfo:
        parse_knot_expr(text)
    assert excinfo.value.column == column


def test_multiple_and_leaves():
    assert multiple(Torus(2, 3), 1) == Torus(2, 3)
    knot = Mirror(Sum((Torus(2, 3), Mirror(TwoBridge(5, 2)))))
    assert list(leaves(knot)) == [(Torus(2, 3), True), (TwoBridge(5, 2), False)]
    with pytest.raises(ValueError):
        multiple(Torus(2, 3), 0)


@pytest.mark.parametrize("p,q,sigma", [
    (2, 3, -2), (2, 5, -4), (3, 4, -6), (3, 5, -8), (3, 7, -8), (4, 5, -8), (5, 6, -16), (2, 7, -6),
])
def test_torus_signatures(p, q, sigma):
    assert torus_signature(p, q) == sigma
    assert torus_lattice_signature(p, q) == sigma


def test_two_bridge_signatures():
    assert two_bridge_signature(15, 4) == -2
    assert two_bridge_signature(51, 16) == -6
    assert two_bridge_signature(97, 26) == -4
    assert two_bridge_signature(3, 1) == 2
    assert signature(TwoBridge(3, 2)) == signature(Torus(2, 3))


def test_plumbing_and_murasugi_agree():
    for knot in two_bridge_catalog(41):
        assert two_bridge_signature(knot.p, knot.q) == murasugi_signature(knot.p, knot.q)


def test_signature_is_additive_and_odd_under_mirror():
    knot = parse_knot_expr("sum:torus:3,4+mirror:dtwist:2,2")
    assert signature(knot) == -6 + 2
    assert signature(Mirror(knot)) == 4


def test_slice_genus_hint():
    assert slice_genus_hint(multiple(DoubleTwist(2, 2), 4)) == 4
    assert slice_genus_hint(Torus(2, 7)) == 3
    assert slice_genus_hint(Sum((Torus(2, 3), Mirror(Torus(2, 3))))) is None
    assert slice_genus_hint(Torus(3, 4)) is None
