import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from sympy.polys.matrices import DomainMatrix

from instanton.algebra import EPSILON, LAURENT, RingSpec, epsilon_multiple, laurent_from_json, laurent_to_json
from instanton.matrix import equal, identity, is_zero, map_entries, nonzero_entries, sparse

logger = logging.getLogger(__name__)

# U-power offsets: an arrow of d or v from r to U^m s has zgrade_r - shift = zgrade_s + 4m
D_SHIFT = 1
V_SHIFT = 2

V_RELATION = "d∘v − v∘d − δ₂∘δ₁ = 0"


class RingMismatchError(ValueError):
    pass


class InvalidComplexError(ValueError):
    def __init__(self, message: str, violations: Sequence[str] = ()):
        super().__init__(message)
        self.violations = list(violations)


@dataclass(frozen=True)
class Bigrading:
    zgrade: int
    idegree: Fraction

    def __post_init__(self):
        object.__setattr__(self, 'idegree', Fraction(self.idegree))

    def __add__(self, other: 'Bigrading') -> 'Bigrading':
        return Bigrading(self.zgrade + other.zgrade, self.idegree + other.idegree)

    def shift(self, m: int) -> 'Bigrading':
        """Bigrading of U^m times a generator."""
        return Bigrading(self.zgrade + 4 * m, self.idegree + m)

    def __str__(self) -> str:
        return f"({self.zgrade}, {self.idegree})"


@dataclass(frozen=True)
class VArrow:
    """A possibly nonzero entry of v: the image of generator source has a term along target."""
    source: int
    target: int
    odd: bool = True


@dataclass
class ValidationReport:
    violations: List[str] = field(default_factory=list)
    unchecked: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, Any]:
        data = {'ok': self.ok, 'violations': list(self.violations)}
        if self.unchecked:
            data['unchecked'] = list(self.unchecked)
        return data


class SComplex:
    """An I-graded S-complex presented as (C, d, v, delta1, delta2).

    Matrices are sparse DomainMatrix objects over Z(T) holding Laurent
    polynomials; entry (s, r) of d or v is the coefficient of generator s in
    the image of generator r. The U-power of each entry is implicit and
    recovered from the bigradings.

    When v_pinned is False the stored v is zero and v_support lists the
    arrows a genuine v may have; invariants that depend on v refuse it.
    """

    def __init__(self, generators: Sequence[Tuple[str, Bigrading]],
                 d: Optional[DomainMatrix] = None, v: Optional[DomainMatrix] = None,
                 delta1: Optional[DomainMatrix] = None, delta2: Optional[DomainMatrix] = None,
                 ring: RingSpec = RingSpec.GENERIC, v_pinned: bool = True,
                 v_support: Optional[Iterable[VArrow]] = None, label: str = "",
                 notes: Optional[Dict[str, Any]] = None):
        self.generators: Tuple[Tuple[str, Bigrading], ...] = tuple(
            (str(name), gr) for name, gr in generators)
        n = len(self.generators)
        names = [name for name, _ in self.generators]
        if len(set(names)) != n:
            raise InvalidComplexError("generator names must be unique")
        self.ring = ring

        def prepare(matrix: Optional[DomainMatrix], rows: int, cols: int, what: str) -> DomainMatrix:
            if matrix is None:
                return sparse((rows, cols))
            if matrix.shape != (rows, cols):
                raise InvalidComplexError(f"{what} has shape {matrix.shape[0]}x{matrix.shape[1]}, expected {rows}x{cols}")
            return map_entries(matrix, ring.reduce, LAURENT)

        self.d = prepare(d, n, n, 'd')
        self.v = prepare(v, n, n, 'v')
        self.delta1 = prepare(delta1, 1, n, 'delta1')
        self.delta2 = prepare(delta2, n, 1, 'delta2')
        self.v_pinned = v_pinned
        self.v_support: FrozenSet[VArrow] = frozenset(v_support or ())
        self.label = label
        self.notes: Dict[str, Any] = dict(notes or {})
        self._index = {name: i for i, name in enumerate(names)}

    @property
    def rank(self) -> int:
        return len(self.generators)

    def index_of(self, name: str) -> int:
        return self._index[name]

    def name(self, i: int) -> str:
        return self.generators[i][0]

    def grading(self, i: int) -> Bigrading:
        return self.generators[i][1]

    def zgrade(self, i: int) -> int:
        return self.generators[i][1].zgrade

    def idegree(self, i: int) -> Fraction:
        return self.generators[i][1].idegree

    def gradings(self) -> List[Bigrading]:
        return [gr for _, gr in self.generators]

    def u_power(self, kind: str, r: Optional[int], s: Optional[int]) -> Fraction:
        """Implicit U-power of an arrow; None stands for the reducible generator."""
        if kind == 'd':
            return Fraction(self.zgrade(r) - D_SHIFT - self.zgrade(s), 4)
        if kind == 'v':
            return Fraction(self.zgrade(r) - V_SHIFT - self.zgrade(s), 4)
        if kind == 'delta1':
            return Fraction(self.zgrade(r) - D_SHIFT, 4)
        if kind == 'delta2':
            return Fraction(-2 - self.zgrade(s), 4)
        raise ValueError(f"unknown map '{kind}'")

    def with_ring(self, ring: RingSpec) -> 'SComplex':
        return SComplex(self.generators, self.d, self.v, self.delta1, self.delta2, ring,
                        self.v_pinned, self.v_support, self.label, self.notes)

    def relabel(self, names: Sequence[str]) -> 'SComplex':
        gens = [(new, gr) for new, (_, gr) in zip(names, self.generators)]
        return SComplex(gens, self.d, self.v, self.delta1, self.delta2, self.ring,
                        self.v_pinned, self.v_support, self.label, self.notes)

    def all_entries(self) -> Iterable[Any]:
        for matrix in (self.d, self.v, self.delta1, self.delta2):
            for _, _, value in nonzero_entries(matrix):
                yield value

    def same_structure(self, other: 'SComplex') -> bool:
        """Equal bigradings and matrices, ignoring generator names."""
        return (self.ring is other.ring
                and self.v_pinned == other.v_pinned
                and self.gradings() == other.gradings()
                and equal(self.d, other.d) and equal(self.v, other.v)
                and equal(self.delta1, other.delta1) and equal(self.delta2, other.delta2))

    def __repr__(self) -> str:
        label = f" {self.label}" if self.label else ""
        pinned = "" if self.v_pinned else ", v unpinned"
        return f"SComplex({self.rank} generators{label}, ring={self.ring.value}{pinned})"


def _vanishes(matrix: DomainMatrix, ring: RingSpec) -> bool:
    return is_zero(map_entries(matrix, ring.reduce))


def validate(C: SComplex) -> ValidationReport:
    report = ValidationReport()
    ring = C.ring
    checks = [
        ("d∘d = 0", C.d.matmul(C.d)),
        ("δ₁∘d = 0", C.delta1.matmul(C.d)),
        ("d∘δ₂ = 0", C.d.matmul(C.delta2)),
    ]
    if C.v_pinned:
        checks.append((V_RELATION, C.d.matmul(C.v).sub(C.v.matmul(C.d)).sub(C.delta2.matmul(C.delta1))))
    else:
        report.unchecked.append(V_RELATION)
    for name, product in checks:
        if not _vanishes(product, ring):
            report.violations.append(name)

    for kind, matrix in (('d', C.d), ('v', C.v)):
        for s, r, _ in nonzero_entries(matrix):
            m = C.u_power(kind, r, s)
            if m.denominator != 1:
                report.violations.append(
                    f"{kind}: {C.name(r)} -> {C.name(s)} has non-integral U-power")
            elif C.idegree(s) + m >= C.idegree(r):
                report.violations.append(
                    f"{kind}: {C.name(r)} -> {C.name(s)} does not lower the instanton grading")
    for _, r, _ in nonzero_entries(C.delta1):
        m = C.u_power('delta1', r, None)
        if m.denominator != 1:
            report.violations.append(f"δ₁: {C.name(r)} has zgrade {C.zgrade(r)} ≢ 1 mod 4")
        elif m >= C.idegree(r):
            report.violations.append(f"δ₁: {C.name(r)} does not lower the instanton grading")
    for s, _, _ in nonzero_entries(C.delta2):
        m = C.u_power('delta2', None, s)
        if m.denominator != 1:
            report.violations.append(f"δ₂: {C.name(s)} has zgrade {C.zgrade(s)} ≢ 2 mod 4")
        elif C.idegree(s) + m >= 0:
            report.violations.append(f"δ₂: {C.name(s)} does not lower the instanton grading")
    if report.violations:
        logger.debug(f"Validation of {C!r} failed: {report.violations}")
    return report


def require_valid(C: SComplex) -> SComplex:
    report = validate(C)
    if not report.ok:
        raise InvalidComplexError(f"invalid S-complex: {', '.join(report.violations)}", report.violations)
    return C


def trivial_complex(ring: RingSpec = RingSpec.GENERIC) -> SComplex:
    """The S-complex of the unknot: C = 0."""
    return SComplex((), ring=ring, label="unknot")


def atom(t, ring: RingSpec = RingSpec.GENERIC) -> SComplex:
    t = Fraction(t)
    if t <= 0:
        raise ValueError(f"atom parameter must be positive, got {t}")
    return SComplex(
        [("z", Bigrading(1, t))],
        delta1=sparse((1, 1), {(0, 0): EPSILON}),
        ring=ring,
        label=f"atom({t})",
    )


def euler_characteristic(C: SComplex) -> int:
    return sum(1 if gr.zgrade % 2 == 0 else -1 for gr in C.gradings())


def tensor(A: SComplex, B: SComplex) -> SComplex:
    """Connected-sum S-complex.

    The C-summand of the product has basis A_i⊗B_j, A_i'⊗B_j, A_i⊗1 and
    1⊗B_j (primes mark the shifted copy), of rank 2ab + a + b.
    """
    if A.ring is not B.ring:
        raise RingMismatchError(f"cannot tensor complexes over {A.ring.value} and {B.ring.value}")
    a, b = A.rank, B.rank
    ab = a * b

    def ix_a(i, j):
        return i * b + j

    def ix_b(i, j):
        return ab + i * b + j

    def ix_p(i):
        return 2 * ab + i

    def ix_q(j):
        return 2 * ab + a + j

    gens: List[Tuple[str, Bigrading]] = [None] * (2 * ab + a + b)
    for i, (na, ga) in enumerate(A.generators):
        for j, (nb, gb) in enumerate(B.generators):
            gens[ix_a(i, j)] = (f"{na}*{nb}", ga + gb)
            gens[ix_b(i, j)] = (f"{na}'*{nb}", Bigrading(ga.zgrade + gb.zgrade + 1, ga.idegree + gb.idegree))
    for i, (na, ga) in enumerate(A.generators):
        gens[ix_p(i)] = (f"{na}*1", ga)
    for j, (nb, gb) in enumerate(B.generators):
        gens[ix_q(j)] = (f"1*{nb}", gb)

    d: Dict[Tuple[int, int], Any] = {}
    v: Dict[Tuple[int, int], Any] = {}
    delta1: Dict[Tuple[int, int], Any] = {}
    delta2: Dict[Tuple[int, int], Any] = {}

    def put(target: Dict, key: Tuple[int, int], value):
        if value:
            target[key] = target.get(key, LAURENT.zero) + value

    a_d, a_v, b_d, b_v = nonzero_entries(A.d), nonzero_entries(A.v), nonzero_entries(B.d), nonzero_entries(B.v)
    a_d1 = {c: x for _, c, x in nonzero_entries(A.delta1)}
    b_d1 = {c: x for _, c, x in nonzero_entries(B.delta1)}
    a_d2 = {r: x for r, _, x in nonzero_entries(A.delta2)}
    b_d2 = {r: x for r, _, x in nonzero_entries(B.delta2)}
    sign = [1 if gr.zgrade % 2 == 0 else -1 for gr in A.gradings()]

    for j in range(b):
        for c, i, x in a_d:
            put(d, (ix_a(c, j), ix_a(i, j)), x)
            put(d, (ix_b(c, j), ix_b(i, j)), -x)
        for c, i, x in a_v:
            put(d, (ix_b(c, j), ix_a(i, j)), x)
        for i, x in a_d1.items():
            put(d, (ix_q(j), ix_a(i, j)), x)
    for i in range(a):
        s = sign[i]
        for e, j, y in b_d:
            put(d, (ix_a(i, e), ix_a(i, j)), y * s)
            put(d, (ix_b(i, e), ix_b(i, j)), y * -s)
        for e, j, y in b_v:
            put(d, (ix_b(i, e), ix_a(i, j)), -y)
            put(v, (ix_a(i, e), ix_a(i, j)), y)
            put(v, (ix_b(i, e), ix_b(i, j)), y)
        for j, y in b_d1.items():
            put(d, (ix_p(i), ix_a(i, j)), y * s)
            put(v, (ix_p(i), ix_b(i, j)), y * -s)
        for e, y in b_d2.items():
            put(d, (ix_b(i, e), ix_p(i)), -y)
            put(v, (ix_a(i, e), ix_p(i)), y)
    for c, i, x in a_d:
        put(d, (ix_p(c), ix_p(i)), x)
    for c, i, x in a_v:
        put(v, (ix_p(c), ix_p(i)), x)
    for j in range(b):
        for c, x in a_d2.items():
            put(d, (ix_b(c, j), ix_q(j)), x)
    for e, j, y in b_d:
        put(d, (ix_q(e), ix_q(j)), y)
    for e, j, y in b_v:
        put(v, (ix_q(e), ix_q(j)), y)
    for i, x in a_d1.items():
        put(delta1, (0, ix_p(i)), x)
    for j, y in b_d1.items():
        put(delta1, (0, ix_q(j)), y)
    for i, x in a_d2.items():
        put(delta2, (ix_p(i), 0), x)
    for j, y in b_d2.items():
        put(delta2, (ix_q(j), 0), y)

    n = len(gens)
    label = f"{A.label or '?'} # {B.label or '?'}"
    return SComplex(gens, sparse((n, n), d), sparse((n, n), v),
                    sparse((1, n), delta1), sparse((n, 1), delta2), A.ring,
                    v_pinned=A.v_pinned and B.v_pinned, label=label)


def tensor_power(A: SComplex, k: int) -> SComplex:
    if k < 0:
        raise ValueError("tensor power must be nonnegative")
    result = trivial_complex(A.ring)
    for _ in range(k):
        result = tensor(result, A)
    if k:
        result.label = f"{k}x({A.label})"
    return result


def dual(A: SComplex) -> SComplex:
    """Dual complex (the mirror knot).

    d' = -dᵀ, v' = vᵀ, δ₁' = δ₂ᵀ, δ₂' = δ₁ᵀ; the dual of a generator at
    (g, t) sits at (-g-1, -t).
    """
    gens = [(f"{name}^", Bigrading(-gr.zgrade - 1, -gr.idegree)) for name, gr in A.generators]
    support = [VArrow(arrow.target, arrow.source, arrow.odd) for arrow in A.v_support]
    return SComplex(gens, A.d.transpose().neg(), A.v.transpose(), A.delta2.transpose(), A.delta1.transpose(),
                    A.ring, A.v_pinned, support, label=f"mirror({A.label})", notes=A.notes)


def change_ring(C: SComplex, ring: RingSpec) -> SComplex:
    return C.with_ring(ring)


def epsilon_coefficient(poly, ring: RingSpec) -> Optional[int]:
    """n with poly == n·ε in the ring, or None."""
    return epsilon_multiple(poly, ring)


def is_epsilon_uniform(C: SComplex) -> bool:
    if C.ring is RingSpec.T4:
        return False
    return all(epsilon_coefficient(p, C.ring) is not None for p in C.all_entries())


def to_json(C: SComplex) -> Dict[str, Any]:
    def arrows(matrix: DomainMatrix) -> List[Dict[str, Any]]:
        return [{'from': C.name(r), 'to': C.name(s), 'poly': laurent_to_json(p)}
                for s, r, p in nonzero_entries(matrix)]

    data = {
        'ring': C.ring.value,
        'generators': [{'name': name, 'zgrade': gr.zgrade,
                        'idegree': [gr.idegree.numerator, gr.idegree.denominator]}
                       for name, gr in C.generators],
        'd': arrows(C.d),
        'v': arrows(C.v),
        'delta1': [{'gen': C.name(r), 'poly': laurent_to_json(p)} for _, r, p in nonzero_entries(C.delta1)],
        'delta2': [{'gen': C.name(s), 'poly': laurent_to_json(p)} for s, _, p in nonzero_entries(C.delta2)],
    }
    if C.label:
        data['label'] = C.label
    if not C.v_pinned:
        data['v_pinned'] = False
    if C.v_support:
        data['v_support'] = [[C.name(a.source), C.name(a.target), a.odd]
                             for a in sorted(C.v_support, key=lambda a: (a.source, a.target))]
    if C.notes:
        data['notes'] = C.notes
    return data


def from_json(data: Dict[str, Any]) -> SComplex:
    try:
        ring = RingSpec.from_name(data.get('ring', 'generic'))
        gens = [(g['name'], Bigrading(int(g['zgrade']), Fraction(int(g['idegree'][0]), int(g['idegree'][1]))))
                for g in data['generators']]
        index = {name: i for i, (name, _) in enumerate(gens)}
        n = len(gens)

        def arrows(key: str) -> DomainMatrix:
            entries = {}
            for arrow in data.get(key, []):
                entries[(index[arrow['to']], index[arrow['from']])] = laurent_from_json(arrow['poly'])
            return sparse((n, n), entries)

        delta1 = sparse((1, n), {(0, index[e['gen']]): laurent_from_json(e['poly'])
                                 for e in data.get('delta1', [])})
        delta2 = sparse((n, 1), {(index[e['gen']], 0): laurent_from_json(e['poly'])
                                 for e in data.get('delta2', [])})
        support = [VArrow(index[src], index[dst], bool(odd)) for src, dst, odd in data.get('v_support', [])]
    except (KeyError, TypeError, IndexError, ValueError) as e:
        raise InvalidComplexError(f"malformed complex JSON: {type(e).__name__}: {e}")
    return SComplex(gens, arrows('d'), arrows('v'), delta1, delta2, ring,
                    v_pinned=data.get('v_pinned', True), v_support=support, label=data.get('label', ''),
                    notes=data.get('notes'))


def dumps(C: SComplex) -> str:
    return json.dumps(to_json(C), indent=2, ensure_ascii=False)


def loads(text: str) -> SComplex:
    try:
        return from_json(json.loads(text))
    except json.JSONDecodeError as e:
        raise InvalidComplexError(f"complex file is not valid JSON: {e}")


@dataclass
class Morphism:
    """Chain-level morphism of S-complexes in block form (λ, μ, Δ₁, Δ₂, η)."""
    lam: DomainMatrix
    mu: DomainMatrix
    Delta1: DomainMatrix
    Delta2: DomainMatrix
    eta: Any

    @classmethod
    def identity(cls, C: SComplex) -> 'Morphism':
        n = C.rank
        return cls(identity(n), sparse((n, n)), sparse((1, n)), sparse((n, 1)), LAURENT.one)

    def check(self, source: SComplex, target: SComplex) -> List[str]:
        if source.ring is not target.ring:
            raise RingMismatchError("morphism between complexes over different rings")
        if not (source.v_pinned and target.v_pinned):
            raise InvalidComplexError("morphism identities involve v, which is not pinned")
        ring = source.ring
        eta = ring.reduce(self.eta)
        lam, mu, Delta1, Delta2 = self.lam, self.mu, self.Delta1, self.Delta2
        identities = [
            ("λd = d'λ", lam.matmul(source.d).sub(target.d.matmul(lam))),
            ("Δ₁d + ηδ₁ − δ₁'λ = 0",
             Delta1.matmul(source.d).add(source.delta1.scalarmul(eta)).sub(target.delta1.matmul(lam))),
            ("d'Δ₂ − ηδ₂' + λδ₂ = 0",
             target.d.matmul(Delta2).sub(target.delta2.scalarmul(eta)).add(lam.matmul(source.delta2))),
            ("μd + λv + Δ₂δ₁ − v'λ + d'μ − δ₂'Δ₁ = 0",
             mu.matmul(source.d).add(lam.matmul(source.v)).add(Delta2.matmul(source.delta1))
             .sub(target.v.matmul(lam)).add(target.d.matmul(mu)).sub(target.delta2.matmul(Delta1))),
        ]
        return [name for name, matrix in identities if not _vanishes(matrix, ring)]

    def is_local_map(self, ring: RingSpec) -> bool:
        return not ring.is_zero(self.eta)
