import logging
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import sympy
from sympy import Symbol
from sympy.polys.matrices import DomainMatrix

from instanton.algebra import EPSILON, RingSpec, laurent_terms
from instanton.invariants import FieldPresentation, require_pinned
from instanton.knots import (DoubleTwist, KnotSpec, Torus, TwoBridge, Unknot, UnsupportedKnotError, leaves, signature,
                             two_bridge_signature)
from instanton.matrix import (SparseRow, entries, is_zero, lattice_functional_gcd, nonzero_entries,
                              polynomial_invariant_factors, sparse)
from instanton.scomplex import Bigrading, InvalidComplexError, SComplex, is_epsilon_uniform, require_valid
from instanton.twobridge import build_two_bridge_complex

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]
TermMap = Dict[Monomial, int]
# (power of x, power of ε, integer coefficient)
Structured = Tuple[int, int, int]


class NotUniformError(ValueError):
    """Some entry of the complex is not an integer multiple of ε."""


class CharacteristicError(ValueError):
    pass


def _clean_terms(terms: TermMap, characteristic: int) -> TermMap:
    if characteristic == 2:
        return {m: 1 for m, c in terms.items() if c % 2}
    return {m: c for m, c in terms.items() if c}


def _structured_terms(gen: Structured, variables: Sequence[str], characteristic: int) -> TermMap:
    x_power, eps_power, coeff = gen
    terms: TermMap = {}
    for e, c in laurent_terms(EPSILON ** eps_power * coeff).items():
        key = (x_power, e) if len(variables) == 2 else (e,)
        terms[key] = c
    return _clean_terms(terms, characteristic)


def _render_monomial(variables: Sequence[str], monomial: Monomial) -> str:
    parts = []
    for name, e in zip(variables, monomial):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def _render_terms(variables: Sequence[str], terms: TermMap) -> str:
    if not terms:
        return "0"
    out = []
    for monomial in sorted(terms):
        c = terms[monomial]
        body = _render_monomial(variables, monomial)
        if not body:
            out.append(str(c))
        elif c == 1:
            out.append(body)
        elif c == -1:
            out.append(f"-{body}")
        else:
            out.append(f"{c}*{body}")
    return " + ".join(out).replace("+ -", "- ")


class PolyIdeal:
    """An ideal given by generators in a Laurent polynomial ring.

    Ideals built from generators x^a ε^b g keep that structure, which is
    what membership and equality are decided on.
    """

    def __init__(self, variables: Sequence[str], characteristic: int, generators: Iterable[TermMap],
                 structure: Optional[Sequence[Structured]] = None,
                 gradings: Optional[Sequence[Bigrading]] = None):
        if characteristic not in (0, 2):
            raise CharacteristicError(f"characteristic must be 0 or 2, got {characteristic}")
        self.variables: Tuple[str, ...] = tuple(variables)
        self.characteristic = characteristic
        self.generators: List[TermMap] = [g for g in (_clean_terms(dict(t), characteristic) for t in generators) if g]
        self.structure: Optional[List[Structured]] = None if structure is None else list(structure)
        self.gradings: Optional[List[Bigrading]] = None if gradings is None else list(gradings)

    @classmethod
    def structured(cls, structure: Sequence[Structured], variables: Sequence[str] = ("x", "T"),
                   characteristic: int = 0, gradings: Optional[Sequence[Bigrading]] = None) -> 'PolyIdeal':
        kept = [g for g in structure if (g[2] % 2 if characteristic == 2 else g[2])]
        gens = [_structured_terms(g, variables, characteristic) for g in kept]
        return cls(variables, characteristic, gens, kept, gradings)

    @classmethod
    def unit(cls, variables: Sequence[str] = ("x", "T"), characteristic: int = 0) -> 'PolyIdeal':
        return cls.structured([(0, 0, 1)], variables, characteristic)

    @classmethod
    def zero(cls, variables: Sequence[str] = ("x", "T"), characteristic: int = 0) -> 'PolyIdeal':
        return cls(variables, characteristic, [], [])

    def is_zero(self) -> bool:
        return not self.generators

    def is_unit(self) -> bool:
        """Contains a unit: ±(monomial) with no x, every other variable being invertible."""
        x_slot = self.variables.index("x") if "x" in self.variables else None
        for gen in self.generators:
            if len(gen) != 1:
                continue
            (monomial, coeff), = gen.items()
            if abs(coeff) == 1 and (x_slot is None or monomial[x_slot] == 0):
                return True
        return False

    def contains_generator(self, gen: Structured) -> bool:
        """Membership of x^a ε^b g in a structured ideal."""
        if self.structure is None:
            raise ValueError("membership is only decided for ideals with structured generators")
        a, b, coeff = gen
        if self.characteristic == 2:
            coeff %= 2
        if coeff == 0:
            return True
        for x_power, eps_power, g in self.structure:
            if x_power <= a and eps_power <= b and coeff % g == 0:
                return True
        return False

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyIdeal):
            return NotImplemented
        if (self.variables, self.characteristic) != (other.variables, other.characteristic):
            return False
        if self.structure is not None and other.structure is not None:
            return (all(other.contains_generator(g) for g in self.structure)
                    and all(self.contains_generator(g) for g in other.structure))
        key = lambda gens: sorted(tuple(sorted(g.items())) for g in gens)
        return key(self.generators) == key(other.generators)

    def __hash__(self) -> int:
        return hash((self.variables, self.characteristic, len(self.generators)))

    def render(self) -> str:
        if self.is_zero():
            return "0"
        return "(" + ", ".join(_render_terms(self.variables, g) for g in self.generators) + ")"

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"PolyIdeal({self.render()}, char={self.characteristic})"

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            'vars': list(self.variables),
            'char': self.characteristic,
            'gens': [{",".join(map(str, m)): c for m, c in sorted(g.items())} for g in self.generators],
        }
        if self.structure is not None:
            data['structure'] = [list(g) for g in self.structure]
        if self.gradings is not None:
            data['gradings'] = [[gr.zgrade, str(gr.idegree)] for gr in self.gradings]
        return data

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> 'PolyIdeal':
        gens = [{tuple(int(e) for e in key.split(",")): int(c) for key, c in g.items()} for g in data['gens']]
        structure = data.get('structure')
        gradings = data.get('gradings')
        return cls(
            data['vars'], int(data['char']), gens,
            None if structure is None else [tuple(g) for g in structure],
            None if gradings is None else [Bigrading(int(z), Fraction(t)) for z, t in gradings],
        )


def ideal_Ik(k: int, torus: bool = False, characteristic: int = 0) -> PolyIdeal:
    """(x^k, x^(k-1)ε, …, ε^k); with torus=True the generators carry the T(2,2k+1) bigradings."""
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    structure = [(k - i, i, 1) for i in range(k + 1)]
    gradings = [Bigrading(2 * i, Fraction(i * i, 2 * k + 1)) for i in range(k + 1)] if torus else None
    return PolyIdeal.structured(structure, characteristic=characteristic, gradings=gradings)


X_SYMBOL = Symbol('x')


class EquivariantComplex:
    """-1⊗d̃ + x⊗χ on C ⊕ C ⊕ R over K[x], K the field of the presentation.

    Blocks are ordered (C, C', reducible). For ε-uniform complexes the
    entries are ε-coefficients and x stands for εy, which leaves the module
    structure over K[x] unchanged up to degree-preserving substitution.
    """

    def __init__(self, base: SComplex, ring: Optional[RingSpec] = None):
        self.base = require_valid(base)
        require_pinned(base, "Equivariant homology")
        self.presentation = FieldPresentation(base, ring)
        P = self.presentation
        n = P.n
        self.size = 2 * n + 1
        self.domain = P.domain.poly_ring(X_SYMBOL)
        x_ring = self.domain.ring
        entries: Dict[Tuple[int, int], Any] = {}

        def put(r: int, c: int, value, degree: int = 0):
            term = x_ring.from_dict({(degree,): value})
            entries[(r, c)] = entries.get((r, c), x_ring.zero) + term

        for s, r, value in nonzero_entries(P.d):
            put(s, r, -value)
            put(n + s, n + r, value)
        for s, r, value in nonzero_entries(P.v):
            put(n + s, r, -value)
        for s, value in P.delta2.items():
            put(n + s, 2 * n, -value)
        for r, value in P.delta1.items():
            put(2 * n, r, -value)
        for r in range(n):
            # χ: C -> C'
            put(n + r, r, P.one, degree=1)
        self.matrix = sparse((self.size, self.size), entries, self.domain)

    def square(self) -> DomainMatrix:
        return self.matrix.matmul(self.matrix)

    def square_is_zero(self) -> bool:
        return is_zero(self.square())

    def homology(self) -> Tuple[int, Tuple[int, ...]]:
        factors = [f for f in polynomial_invariant_factors(entries(self.matrix), self.matrix.shape, self.domain) if f]
        free_rank = self.size - 2 * len(factors)
        torsion = tuple(sorted(f.degree() for f in factors if f.degree() > 0))
        return free_rank, torsion


def hat_complex_rank(A: SComplex, ring: Optional[RingSpec] = None) -> Tuple[int, Tuple[int, ...]]:
    """(free rank, degrees of the torsion invariant factors) of the equivariant homology over K[x]."""
    complex_ = EquivariantComplex(A, ring)
    free_rank, torsion = complex_.homology()
    logger.debug(f"Equivariant homology of {A.label or A!r}: free rank {free_rank}, torsion {torsion}")
    return free_rank, torsion


def _integral(P: FieldPresentation, values: SparseRow, position: Dict[int, int]) -> Dict[int, int]:
    return {position[c]: int(P.domain.numer(x)) for c, x in values.items() if c in position and x}


def _j_generator(P: FieldPresentation, i: int, integral: bool) -> int:
    """g with J_i = ε^max(i,0)·(g); 0 for the zero ideal."""
    if not integral:
        return 1 if P.level_feasible(i) else 0
    members = P.level_members(i)
    position = {c: k for k, c in enumerate(members)}
    if i >= 1:
        if not members:
            return 0
        functionals = P.delta1_v_powers(i)
        constraints = [_integral(P, values, position) for values in list(P.d_rows()) + functionals[:-1]]
        return lattice_functional_gcd(_integral(P, functionals[-1], position), constraints, len(members))
    m = -i
    terms = [j for j in range(m + 1) if (m - j) % 2 == 0]
    images = P.v_powers_delta2(m + 1)
    width = len(members) + len(terms)
    rows: Dict[int, Dict[int, int]] = {}
    for s, c, x in nonzero_entries(P.d):
        if c in position:
            rows.setdefault(s, {})[position[c]] = int(P.domain.numer(x))
    for k, j in enumerate(terms):
        for s, x in images[j].items():
            values = rows.setdefault(s, {})
            values[len(members) + k] = values.get(len(members) + k, 0) - int(P.domain.numer(x))
    return lattice_functional_gcd({width - 1: 1}, list(rows.values()), width)


def _ideal(i: int, g: int, characteristic: int) -> PolyIdeal:
    if g == 0:
        return PolyIdeal.zero(("T",), characteristic)
    return PolyIdeal.structured([(0, max(i, 0), g)], ("T",), characteristic)


def j_ideals_uniform(A: SComplex, ring: Optional[RingSpec] = None) -> Dict[int, PolyIdeal]:
    """J_i for i in [-r, r+1], r the rank: ε^i (g_i) for i >= 1, (g_i) for i <= 0.

    Over the T^4 = 1 quotient ε vanishes, so every J_i with i >= 1 is 0.
    """
    ring = ring or A.ring
    C = require_valid(A if ring is A.ring else A.with_ring(ring))
    require_pinned(C, "J ideals")
    if ring is not RingSpec.T4 and not is_epsilon_uniform(C):
        raise NotUniformError(f"{C.label or C!r} has entries that are not integer multiples of ε")
    P = FieldPresentation(C, ring)
    integral = ring is RingSpec.GENERIC
    characteristic = ring.characteristic
    ideals: Dict[int, PolyIdeal] = {}
    for i in range(-C.rank, C.rank + 2):
        if ring is RingSpec.T4 and i >= 1:
            ideals[i] = PolyIdeal.zero(("T",), 0)
            continue
        ideals[i] = _ideal(i, _j_generator(P, i, integral), characteristic)
    nontrivial = [i for i, ideal in ideals.items() if not ideal.is_zero()]
    logger.debug(f"J ideals of {C.label or C!r}: nonzero up to i = {max(nontrivial) if nontrivial else None}")
    return ideals


def _signature_pattern(i: int, s: int) -> int:
    """Generator of J_i for a 2-bridge knot with h = s: (ε^i) up to s, (1) at or below min(0, s)."""
    if i >= 1:
        return 1 if i <= s else 0
    return 1 if i <= min(0, s) else 0


def j_ideals_two_bridge(p: int, q: int) -> Dict[int, PolyIdeal]:
    """J_i of the 2-bridge knot K(p, q).

    Levels 1 and 0 only see δ₁ and δ₂ and are computed from the complex;
    the rest follow the signature pattern, and a disagreement on the
    computed levels is an error.
    """
    C = build_two_bridge_complex(p, q, allow_even=True)
    if C.v_pinned:
        return j_ideals_uniform(C)
    if not is_epsilon_uniform(C):
        raise NotUniformError(f"{C.label} has entries that are not integer multiples of ε")
    s = -two_bridge_signature(p, q) // 2
    P = FieldPresentation(C)
    ideals: Dict[int, PolyIdeal] = {}
    for i in range(-C.rank, C.rank + 2):
        expected = _signature_pattern(i, s)
        if i in (0, 1):
            g = _j_generator(P, i, integral=True)
            if g != expected:
                raise InvalidComplexError(
                    f"J_{i} of {C.label} is generated by {g}, but h = {s} predicts {expected}")
        ideals[i] = _ideal(i, expected, 0)
    logger.debug(f"J ideals of {C.label}: level 1 and 0 computed, others from h = {s}")
    return ideals


def _trefoil_sign(leaf: KnotSpec) -> Optional[int]:
    """+1 for a right-handed trefoil leaf (σ = -2), -1 for left-handed, 0 for the unknot."""
    if isinstance(leaf, Unknot) or (isinstance(leaf, Torus) and leaf.is_unknot):
        return 0
    if isinstance(leaf, DoubleTwist):
        leaf = leaf.as_two_bridge()
    if isinstance(leaf, Torus) and (leaf.p, leaf.q) == (2, 3):
        return 1
    if isinstance(leaf, TwoBridge) and leaf.p == 3:
        return 1 if signature(leaf) < 0 else -1
    return None


def z_hat_structured(knot: KnotSpec) -> PolyIdeal:
    """ẑ for connected sums of trefoils of one handedness: I^k for k right-handed copies, (1) otherwise."""
    right = left = 0
    for leaf, mirrored in leaves(knot):
        sign = _trefoil_sign(leaf)
        if sign is None:
            raise UnsupportedKnotError(f"ẑ is only available for sums of trefoils, not {knot.render()}")
        if mirrored:
            sign = -sign
        right += sign > 0
        left += sign < 0
    if right and left:
        raise UnsupportedKnotError(f"{knot.render()} mixes both trefoils")
    return ideal_Ik(right)


_T1, _T2, _T3 = sympy.symbols('T1 T2 T3')
BN_VARIABLES = ("T1", "T2", "T3")


def bn_polynomial():
    """Image of x: T1T2T3 + T1/(T2T3) + T2/(T1T3) + T3/(T1T2)."""
    return _T1 * _T2 * _T3 + _T1 / (_T2 * _T3) + _T2 / (_T1 * _T3) + _T3 / (_T1 * _T2)


def _char2_terms(expr) -> TermMap:
    terms: TermMap = {}
    for term in sympy.Add.make_args(sympy.expand(expr)):
        coeff, monomial = term.as_coeff_Mul()
        powers = monomial.as_powers_dict()
        key = tuple(int(powers.get(symbol, 0)) for symbol in (_T1, _T2, _T3))
        terms[key] = terms.get(key, 0) + int(coeff)
    return _clean_terms(terms, 2)


def basechange_BN(ideal: PolyIdeal) -> PolyIdeal:
    """Base change along T -> T1, x -> T1T2T3 + T1T2⁻¹T3⁻¹ + T1⁻¹T2T3⁻¹ + T1⁻¹T2⁻¹T3."""
    if ideal.characteristic != 2:
        raise CharacteristicError("the base change is defined in characteristic two only")
    if ideal.variables != ("x", "T"):
        raise ValueError(f"expected an ideal in x and T, got variables {ideal.variables}")
    P = bn_polynomial()
    generators = []
    for gen in ideal.generators:
        expr = sum((c * P ** a * _T1 ** e for (a, e), c in gen.items()), sympy.Integer(0))
        generators.append(_char2_terms(expr))
    return PolyIdeal(BN_VARIABLES, 2, generators)
