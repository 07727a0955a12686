import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Dict, Iterable, List, Optional, Sequence, Union

from sympy import GF, QQ

from instanton.algebra import RingSpec
from instanton.knots import (DoubleTwist, KnotSpec, Mirror, Sum, Torus, TwoBridge, Unknot,
                             UnsupportedKnotError, signature)
from instanton.matrix import SparseRow, column, in_row_span, map_entries, nonzero_entries, row
from instanton.scomplex import InvalidComplexError, SComplex, epsilon_coefficient, is_epsilon_uniform, validate

logger = logging.getLogger(__name__)


@total_ordering
class _Infinity:
    """+∞ for Γ values; compares above every rational."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other) -> bool:
        return isinstance(other, _Infinity)

    def __lt__(self, other) -> bool:
        return False

    def __gt__(self, other) -> bool:
        return not isinstance(other, _Infinity)

    def __hash__(self) -> int:
        return hash('INFINITY')

    def __str__(self) -> str:
        return "inf"

    def __repr__(self) -> str:
        return "INFINITY"


INFINITY = _Infinity()
GammaValue = Union[Fraction, _Infinity]


def format_value(value) -> str:
    if isinstance(value, _Infinity):
        return "inf"
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    return str(value)


@dataclass
class GammaFunction:
    values: Dict[int, GammaValue] = field(default_factory=dict)

    def __getitem__(self, k: int) -> GammaValue:
        return self.values[k]

    def is_monotone(self) -> bool:
        ks = sorted(self.values)
        return all(self.values[a] <= self.values[b] for a, b in zip(ks, ks[1:]))

    def render(self) -> str:
        return ", ".join(f"Γ({k}) = {format_value(self.values[k])}" for k in sorted(self.values))

    def to_dict(self) -> Dict[str, str]:
        return {str(k): format_value(v) for k, v in sorted(self.values.items())}


class UnpinnedVError(ValueError):
    """The requested invariant depends on entries of v that are not pinned."""


class FieldPresentation:
    """The maps of an S-complex over a field, ready for linear feasibility questions.

    ε-uniform complexes over generic or characteristic-two rings divide ε
    out of every entry and work over Q or GF(2); the level systems stay
    equivalent after rescaling the unknowns by powers of ε. Everything
    else works over the fraction field Z(T) (GF(2)(T) in characteristic
    two), except the T^4 = 1 quotient, which is evaluated at T = 1.
    """

    def __init__(self, C: SComplex, ring: Optional[RingSpec] = None):
        ring = ring or C.ring
        if ring is not C.ring:
            C = C.with_ring(ring)
        self.complex = C
        self.ring = ring
        self.n = C.rank
        if ring is RingSpec.T4:
            self.mode = 'specialized'
            self.domain = QQ
            convert = ring.field_element
        elif is_epsilon_uniform(C):
            self.mode = 'uniform'
            self.domain = GF(2) if ring is RingSpec.CHAR2 else QQ
            convert = lambda p: self.domain.convert(epsilon_coefficient(p, ring))
        else:
            self.mode = 'fraction-field'
            self.domain = ring.field
            convert = ring.field_element
        self.one = self.domain.one
        self.d = map_entries(C.d, convert, self.domain)
        self.v = map_entries(C.v, convert, self.domain)
        self._delta1 = map_entries(C.delta1, convert, self.domain)
        self._delta2 = map_entries(C.delta2, convert, self.domain)
        self.delta1: SparseRow = row(self._delta1, 0)
        self.delta2: SparseRow = column(self._delta2, 0)
        self._d_rows: Dict[int, SparseRow] = {}
        for s, c, x in nonzero_entries(self.d):
            self._d_rows.setdefault(s, {})[c] = x
        logger.debug(f"Presented {C!r} over {ring.value} in {self.mode} mode")

    def d_rows(self) -> List[SparseRow]:
        return list(self._d_rows.values())

    def delta1_v_powers(self, count: int) -> List[SparseRow]:
        """Row functionals δ₁, δ₁v, …, δ₁v^(count-1)."""
        rows = []
        current = self._delta1
        for _ in range(count):
            rows.append(row(current, 0))
            current = current.matmul(self.v)
        return rows

    def v_powers_delta2(self, count: int) -> List[SparseRow]:
        """Column vectors δ₂, vδ₂, …, v^(count-1)δ₂."""
        cols = []
        current = self._delta2
        for _ in range(count):
            cols.append(column(current, 0))
            current = self.v.matmul(current)
        return cols

    def level_members(self, k: int) -> List[int]:
        """Generators admitting an integral U-shift into zgrade 2k-1."""
        target = (2 * k - 1) % 4
        return [i for i in range(self.n) if self.complex.zgrade(i) % 4 == target]

    def shifted_idegree(self, i: int, k: int) -> Fraction:
        C = self.complex
        return C.idegree(i) + Fraction(2 * k - 1 - C.zgrade(i), 4)

    def positive_level_feasible(self, k: int, support: Sequence[int]) -> bool:
        """Is there a cycle α on support with δ₁vⁱα = 0 for i < k-1 and δ₁v^(k-1)α ≠ 0?"""
        if not support:
            return False
        allowed = set(support)
        constraints = []
        for values in self._d_rows.values():
            restricted = {c: x for c, x in values.items() if c in allowed}
            if restricted:
                constraints.append(restricted)
        functionals = self.delta1_v_powers(k)
        for values in functionals[:-1]:
            restricted = {c: x for c, x in values.items() if c in allowed}
            if restricted:
                constraints.append(restricted)
        target = {c: x for c, x in functionals[-1].items() if c in allowed}
        return bool(target) and not in_row_span(target, constraints, self.n, self.domain)

    def nonpositive_level_feasible(self, k: int, support: Sequence[int]) -> bool:
        """Is dα = Σ vⁱδ₂(aᵢ) solvable with a_(-k) ≠ 0?

        Only the aᵢ with i ≡ -k (mod 2) have an integral U-shift.
        """
        m = -k
        terms = [i for i in range(m + 1) if (m - i) % 2 == 0]
        images = self.v_powers_delta2(m + 1)
        index = {c: pos for pos, c in enumerate(support)}
        offset = len(support)
        rows: Dict[int, SparseRow] = {}
        for s, c, x in nonzero_entries(self.d):
            if c in index:
                rows.setdefault(s, {})[index[c]] = x
        for pos, i in enumerate(terms):
            col = offset + pos
            for s, x in images[i].items():
                values = rows.setdefault(s, {})
                values[col] = values.get(col, self.domain.zero) - x
        width = offset + len(terms)
        witness = {width - 1: self.one}
        return not in_row_span(witness, list(rows.values()), width, self.domain)

    def level_feasible(self, k: int, support: Optional[Sequence[int]] = None) -> bool:
        if support is None:
            support = self.level_members(k)
        if k >= 1:
            return self.positive_level_feasible(k, support)
        return self.nonpositive_level_feasible(k, support)


def _present(A: SComplex, ring: Optional[RingSpec] = None) -> FieldPresentation:
    report = validate(A)
    if not report.ok:
        raise InvalidComplexError(f"invalid S-complex: {', '.join(report.violations)}", report.violations)
    return FieldPresentation(A, ring)


def require_pinned(A: SComplex, what: str):
    if not A.v_pinned:
        raise UnpinnedVError(f"{what} of {A.label or A!r} depends on v, which is not pinned for this complex")


def _gamma_on(presentation: FieldPresentation, k: int) -> GammaValue:
    members = presentation.level_members(k)
    shifted = {i: presentation.shifted_idegree(i, k) for i in members}
    if k <= 0 and presentation.level_feasible(k, []):
        return Fraction(0)
    for threshold in sorted(set(shifted.values())):
        support = [i for i in members if shifted[i] <= threshold]
        if presentation.level_feasible(k, support):
            logger.debug(f"Γ({k}) attained at threshold {threshold} with {len(support)} generators")
            return max(threshold, Fraction(0)) if k <= 0 else threshold
    return INFINITY


def gamma(A: SComplex, k: int, ring: Optional[RingSpec] = None) -> GammaValue:
    """Γ_A(k): least instanton grading of a level-k witness, or INFINITY."""
    ring = ring or A.ring
    if ring is RingSpec.T4:
        raise ValueError("Γ is defined over rings with T^4 ≠ 1")
    require_pinned(A, "Γ")
    return _gamma_on(_present(A, ring), k)


def gamma_function(A: SComplex, ks: Iterable[int], ring: Optional[RingSpec] = None) -> GammaFunction:
    ring = ring or A.ring
    if ring is RingSpec.T4:
        raise ValueError("Γ is defined over rings with T^4 ≠ 1")
    require_pinned(A, "Γ")
    presentation = _present(A, ring)
    return GammaFunction({k: _gamma_on(presentation, k) for k in ks})


def _h_pinned(presentation: FieldPresentation) -> int:
    bound = 4 * presentation.n + 4
    if presentation.level_feasible(1):
        k = 1
        while presentation.level_feasible(k + 1):
            k += 1
            if k > bound:
                raise InvalidComplexError("δ₁vⁱ chain does not terminate; v is not nilpotent")
        return k
    k = 0
    while not presentation.level_feasible(k):
        k -= 1
        if k < -bound:
            raise InvalidComplexError("no nonpositive level is feasible; v is not nilpotent")
    return k


@dataclass(frozen=True)
class HBounds:
    """lower <= h <= upper; None marks a side the v-support leaves open."""
    lower: Optional[int]
    upper: Optional[int]

    @property
    def exact(self) -> Optional[int]:
        if self.lower is not None and self.lower == self.upper:
            return self.lower
        return None

    def __contains__(self, value: int) -> bool:
        return (self.lower is None or self.lower <= value) and (self.upper is None or value <= self.upper)

    def __str__(self) -> str:
        low = "-inf" if self.lower is None else str(self.lower)
        high = "inf" if self.upper is None else str(self.upper)
        return f"[{low}, {high}]"


def _h_bracket(presentation: FieldPresentation) -> HBounds:
    """Bounds on h that hold for every v supported on the odd arrows of the complex.

    Levels 1 and 0 only involve δ₁ and δ₂. Above level 1, a witness at
    level t+1 needs a generator of zgrade 2t+1 (mod 4) from which t arrows
    lead into the δ₁ support. Below level 0, v^m δ₂ vanishes once m
    exceeds the longest arrow path out of the δ₂ support.
    """
    C = presentation.complex
    arrows = [(a.source, a.target) for a in C.v_support if a.odd]
    n = presentation.n
    if presentation.level_feasible(1):
        upper: Optional[int] = 1
        reach = set(presentation.delta1)
        for t in range(1, n + 2):
            reach = {i for i, j in arrows if j in reach}
            if not reach:
                break
            if any(C.zgrade(i) % 4 == (2 * (t + 1) - 1) % 4 for i in reach):
                upper = t + 1
        else:
            upper = None
        return HBounds(1, upper)
    if presentation.level_feasible(0):
        return HBounds(0, 0)
    current = set(presentation.delta2)
    m = 0
    while current:
        m += 1
        if m > n + 1:
            return HBounds(None, -1)
        current = {j for i, j in arrows if i in current}
    return HBounds(-max(m, 1), -1)


def h_bounds(A: SComplex, ring: Optional[RingSpec] = None) -> HBounds:
    """Bracket for h over the fraction field; exact when v is pinned."""
    presentation = _present(A, ring or A.ring)
    if A.v_pinned:
        h = _h_pinned(presentation)
        return HBounds(h, h)
    return _h_bracket(presentation)


def h_field(A: SComplex, ring: Optional[RingSpec] = None) -> int:
    """Frøyshov invariant over the fraction field of the ring: the largest feasible level.

    Complexes whose v is not pinned get an answer only when the
    v-independent bracket collapses to a single value.
    """
    bounds = h_bounds(A, ring)
    if bounds.exact is None:
        raise UnpinnedVError(f"h of {A.label or A!r} is only known to lie in {bounds}; v is not pinned")
    return bounds.exact


def gamma_closed_form_atoms(ts: Iterable, k: int) -> GammaValue:
    values = sorted(Fraction(t) for t in ts)
    if k <= 0:
        return Fraction(0)
    if k > len(values):
        return INFINITY
    return sum(values[:k], Fraction(0))


def _torus_shifted_h(p: int, q: int) -> int:
    """h + σ/2 for T_{p,q} under T^4 = 1, by Euclidean descent."""
    total = 0
    p, q = min(p, q), max(p, q)
    while p > 1:
        total -= (p * p) // 4
        p, q = min(p, q - p), max(p, q - p)
    return total


def h_t4(knot: KnotSpec) -> int:
    """h over coefficient rings with T^4 = 1."""
    if isinstance(knot, Unknot):
        return 0
    if isinstance(knot, (TwoBridge, DoubleTwist)):
        # quasi-alternating
        return 0
    if isinstance(knot, Torus):
        sigma = signature(knot)
        return _torus_shifted_h(knot.p, knot.q) - sigma // 2
    if isinstance(knot, Mirror):
        return -h_t4(knot.knot)
    if isinstance(knot, Sum):
        return sum(h_t4(part) for part in knot.parts)
    raise UnsupportedKnotError(f"h over T^4 = 1 is not available for {knot}")


def h_signature_rule(knot: KnotSpec) -> int:
    """h over rings with T^4 ≠ 1 for knots whose complexes satisfy the signature rule."""
    return -signature(knot) // 2
