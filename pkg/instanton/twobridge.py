import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, FrozenSet, Iterator, List, Set, Tuple

from sympy import GF, QQ

from instanton.algebra import EPSILON, RingSpec
from instanton.invariants import INFINITY, GammaValue
from instanton.knots import DoubleTwist, KnotSpec, Mirror, Sum, Torus, TwoBridge, Unknot, UnsupportedKnotError
from instanton.matrix import SparseRow, kernel_basis, solve, sparse
from instanton.scomplex import (Bigrading, SComplex, VArrow, atom, dual, require_valid, tensor,
                                trivial_complex)

logger = logging.getLogger(__name__)

EvenRelation = Tuple[int, int, int, int]


class TwoBridgeError(ValueError):
    pass


@dataclass(frozen=True)
class Relation:
    """A solution (k1, k2) of the lens-space congruences linking ζ^i to ζ^j."""
    i: int
    j: int
    k1: int
    k2: int
    n1: int
    n2: int
    p: int

    @property
    def odd(self) -> bool:
        return self.k1 % 2 == 1 and self.k2 % 2 == 1

    @property
    def energy(self) -> Fraction:
        return Fraction(self.k1 * self.k2, self.p)

    @property
    def zgrade_drop(self) -> int:
        return self.n1 + self.n2 // 2 + (1 if self.i == 0 else 0)

    @property
    def is_arrow(self) -> bool:
        return self.n2 == 0


def lattice_counts(k1: int, k2: int, p: int, q: int) -> Tuple[int, int]:
    """(N1, N2) for the box |a| <= k1, |b| <= k2 on the lattice a + qb ≡ 0 (mod p).

    N1 counts interior points; N2 counts points with exactly one coordinate
    on the boundary of the box.
    """
    if k1 < 1 or k2 < 1:
        raise ValueError(f"box sizes must be positive, got ({k1}, {k2})")
    n1 = n2 = 0
    for b in range(-k2, k2 + 1):
        a = (-q * b + k1) % p - k1
        while a <= k1:
            inside_a, inside_b = abs(a) < k1, abs(b) < k2
            if inside_a and inside_b:
                n1 += 1
            elif (abs(a) == k1 and inside_b) or (inside_a and abs(b) == k2):
                n2 += 1
            a += p
    return n1, n2


def lattice_set(k1: int, k2: int, p: int, q: int) -> Set[Tuple[int, int]]:
    """Points of a + qb ≡ 0 (mod p) with |a| < k1, |b| <= k2 or |a| <= k1, |b| < k2."""
    points = set()
    for b in range(-k2, k2 + 1):
        a = (-q * b + k1) % p - k1
        while a <= k1:
            if (abs(a) < k1 and abs(b) <= k2) or (abs(a) <= k1 and abs(b) < k2):
                points.add((a, b))
            a += p
    return points


def _check_parameters(p: int, q: int) -> int:
    if p < 3 or p % 2 == 0:
        raise TwoBridgeError(f"p must be odd and at least 3, got {p}")
    if math.gcd(p, q) != 1:
        raise TwoBridgeError(f"p and q must be coprime, got ({p}, {q})")
    return q % p


def relations(p: int, q: int) -> List[Relation]:
    """All relations with (N1, N2) in {(1, 0), (1, 2)}, in enumeration order."""
    q = _check_parameters(p, q)
    n = (p - 1) // 2
    half = (p + 1) // 2
    found = []
    for k1 in range(1, p + 1):
        for k2 in range(1, p // k1 + 1):
            n1, n2 = lattice_counts(k1, k2, p, q)
            if n1 != 1 or n2 not in (0, 2):
                continue
            r = (k1 - q * k2) * half % p
            s = (k1 + q * k2) * half % p
            i = r if r <= n else p - r
            j = s if s <= n else p - s
            if i == j:
                logger.debug(f"({p},{q}): dropping self relation at ζ^{i} from ({k1},{k2})")
                continue
            found.append(Relation(i, j, k1, k2, n1, n2, p))
    return found


class VSupport:
    """Ordered pairs (i, j), 1-based, where ⟨vζ^i, ζ^j⟩ may be nonzero."""

    def __init__(self, pairs: Dict[Tuple[int, int], bool]):
        self._pairs = dict(pairs)

    @classmethod
    def from_relations(cls, rels: List[Relation]) -> 'VSupport':
        pairs: Dict[Tuple[int, int], bool] = {}
        for rel in rels:
            if rel.n2 == 2 and rel.i > 0 and rel.j > 0:
                key = (rel.i, rel.j)
                pairs[key] = pairs.get(key, False) or rel.odd
        return cls(pairs)

    def __contains__(self, pair) -> bool:
        return tuple(pair) in self._pairs

    def __iter__(self) -> Iterator[Tuple[int, int]]:
        return iter(self._pairs)

    def __len__(self) -> int:
        return len(self._pairs)

    def is_odd(self, i: int, j: int) -> bool:
        return self._pairs[(i, j)]

    def odd_pairs(self) -> List[Tuple[int, int]]:
        return [pair for pair, odd in self._pairs.items() if odd]

    def successors(self, i: int) -> List[int]:
        return [j for (a, j) in self._pairs if a == i]

    def arrows(self) -> List[VArrow]:
        """Zero-based arrows for SComplex metadata."""
        return [VArrow(i - 1, j - 1, odd) for (i, j), odd in self._pairs.items()]


@dataclass(frozen=True)
class Skeleton:
    """Everything of a 2-bridge complex except v: gradings, signs of d, δ₁ and δ₂.

    even_relations lists (i, j, k1, k2) for (1,0) relations with an even
    k1 or k2; they contribute no entry.
    """
    p: int
    q: int
    gradings: Tuple[Bigrading, ...]
    d: Tuple[Tuple[int, int, int], ...]
    delta1: Tuple[Tuple[int, int], ...]
    delta2: Tuple[Tuple[int, int], ...]
    support: VSupport
    even_relations: Tuple[EvenRelation, ...] = ()

    @property
    def rank(self) -> int:
        return len(self.gradings)


def _propagate_gradings(p: int, q: int, rels: List[Relation]) -> Dict[int, Tuple[int, Fraction]]:
    known: Dict[int, Tuple[int, Fraction]] = {0: (0, Fraction(0))}

    def sweep(usable):
        queue = list(known)
        while queue:
            x = queue.pop(0)
            for rel in rels:
                if not usable(rel):
                    continue
                g, t = known[x]
                if rel.i == x and rel.j not in known:
                    known[rel.j] = (g - rel.zgrade_drop, t - rel.energy)
                    queue.append(rel.j)
                elif rel.j == x and rel.i not in known:
                    known[rel.i] = (g + rel.zgrade_drop, t + rel.energy)
                    queue.append(rel.i)

    sweep(lambda rel: rel.odd)
    sweep(lambda rel: True)
    n = (p - 1) // 2
    missing = [i for i in range(1, n + 1) if i not in known]
    if missing:
        raise TwoBridgeError(f"({p},{q}): no bigrading reaches generators {missing}")
    for rel in rels:
        dg = known[rel.i][0] - known[rel.j][0] - rel.zgrade_drop
        dt = known[rel.i][1] - known[rel.j][1] - rel.energy
        if dg % 4 != 0 or dt != Fraction(dg, 4):
            raise TwoBridgeError(
                f"({p},{q}): relation ζ^{rel.i} -> ζ^{rel.j} with (k1,k2) = ({rel.k1},{rel.k2}) "
                f"is inconsistent with the U-action")
    return known


def _solve_signs(p: int, q: int, arrows: List[Relation]) -> List[int]:
    """Signs ±1 making every pair of 2-paths cancel, as a linear system over GF(2)."""
    index = {(a.i, a.j): k for k, a in enumerate(arrows)}
    outgoing: Dict[int, List[Relation]] = {}
    for a in arrows:
        outgoing.setdefault(a.i, []).append(a)
    groups: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
    for a in arrows:
        if a.j == 0:
            continue
        for c in outgoing.get(a.j, []):
            if a.i == 0 and c.j == 0:
                continue
            groups.setdefault((a.i, c.j), []).append((index[(a.i, a.j)], index[(c.i, c.j)]))
    rows: List[SparseRow] = []
    for (start, end), paths in groups.items():
        if len(paths) == 1 or len(paths) > 2:
            raise TwoBridgeError(f"({p},{q}): {len(paths)} paths from ζ^{start} to ζ^{end} cannot cancel")
        bits: Set[int] = set()
        for var in paths[0] + paths[1]:
            bits ^= {var}
        rows.append({var: 1 for var in bits})
    solution = solve(rows, [1] * len(rows), len(arrows), GF(2))
    if solution is None:
        raise TwoBridgeError(f"({p},{q}): arrow signs admit no consistent choice")
    return [-1 if solution.get(k) else 1 for k in range(len(arrows))]


@lru_cache(maxsize=None)
def two_bridge_skeleton(p: int, q: int, allow_even: bool = False) -> Skeleton:
    """Gradings and d/δ₁/δ₂ signs of K(p, q).

    A (1,0) relation with an even k1 or k2 would put an entry outside ε·Z
    into d, δ₁ or δ₂. Such relations raise TwoBridgeError unless the caller
    passes allow_even, in which case they are dropped with a warning and
    listed on the skeleton.
    """
    q = _check_parameters(p, q)
    rels = relations(p, q)
    known = _propagate_gradings(p, q, rels)
    arrows: List[Relation] = []
    seen = set()
    even: List[EvenRelation] = []
    for rel in rels:
        if not rel.is_arrow:
            continue
        if not rel.odd:
            even.append((rel.i, rel.j, rel.k1, rel.k2))
            continue
        if (rel.i, rel.j) in seen:
            continue
        seen.add((rel.i, rel.j))
        arrows.append(rel)
    if even:
        listing = ", ".join(f"ζ^{i} -> ζ^{j} with (k1,k2) = ({k1},{k2})" for i, j, k1, k2 in even)
        if not allow_even:
            raise TwoBridgeError(f"({p},{q}): (1,0) relations with even k1 or k2: {listing}")
        logger.warning(f"({p},{q}): dropping (1,0) relations with even k1 or k2: {listing}")
    signs = _solve_signs(p, q, arrows)
    d, delta1, delta2 = [], [], []
    for rel, sign in zip(arrows, signs):
        if rel.j == 0:
            delta1.append((rel.i - 1, sign))
        elif rel.i == 0:
            delta2.append((rel.j - 1, sign))
        else:
            d.append((rel.j - 1, rel.i - 1, sign))
    n = (p - 1) // 2
    gradings = tuple(Bigrading(known[i][0], known[i][1]) for i in range(1, n + 1))
    return Skeleton(p, q, gradings, tuple(d), tuple(delta1), tuple(delta2), VSupport.from_relations(rels),
                    tuple(even))


def _assemble(skeleton: Skeleton, label: str) -> SComplex:
    n = skeleton.rank
    gens = [(f"z{i + 1}", gr) for i, gr in enumerate(skeleton.gradings)]
    d = sparse((n, n), {(s, r): EPSILON * sign for s, r, sign in skeleton.d})
    delta1 = sparse((1, n), {(0, r): EPSILON * sign for r, sign in skeleton.delta1})
    delta2 = sparse((n, 1), {(s, 0): EPSILON * sign for s, sign in skeleton.delta2})
    notes = {}
    if skeleton.even_relations:
        notes['even_relations'] = [list(rel) for rel in skeleton.even_relations]
    return SComplex(gens, d, None, delta1, delta2, RingSpec.GENERIC, v_pinned=False,
                    v_support=skeleton.support.arrows(), label=label, notes=notes)


@lru_cache(maxsize=None)
def build_two_bridge_complex(p: int, q: int, allow_even: bool = False) -> SComplex:
    """The I-graded S-complex of the 2-bridge knot K(p, q).

    Torus pairs (q ≡ -1) get the closed form with a pinned v. Every other
    complex stores v = 0, is marked unpinned and carries the admissible
    v-support; invariants that depend on v refuse it.
    """
    q = _check_parameters(p, q)
    if q == p - 1:
        return torus_two_bridge_complex((p - 1) // 2)
    skeleton = two_bridge_skeleton(p, q, allow_even=allow_even)
    label = TwoBridge(p, q).render()
    C = require_valid(_assemble(skeleton, label))
    logger.info(f"Built {label}: {C.rank} generators, {len(skeleton.support)} v-support pairs, v unpinned")
    return C


def torus_two_bridge_complex(k: int, ring: RingSpec = RingSpec.GENERIC) -> SComplex:
    """Closed form for T_{2,2k+1}: ζ^i at (2i-1, i²/(2k+1)), v(ζ^i) = εζ^(i-1), δ₁ on ζ^1."""
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    if k == 0:
        return trivial_complex(ring)
    p = 2 * k + 1
    gens = [(f"z{i}", Bigrading(2 * i - 1, Fraction(i * i, p))) for i in range(1, k + 1)]
    v = sparse((k, k), {(i - 1, i): EPSILON for i in range(1, k)})
    delta1 = sparse((1, k), {(0, 0): EPSILON})
    support = [VArrow(i, i - 1, True) for i in range(1, k)]
    return SComplex(gens, v=v, delta1=delta1, ring=ring, v_pinned=True, v_support=support,
                    label=TwoBridge(p, p - 1).render())


@dataclass(frozen=True)
class LowerBound:
    value: GammaValue
    exact: bool
    candidates: FrozenSet[int] = frozenset()


def _reach_delta1(skeleton: Skeleton, steps: int) -> Set[int]:
    """Generators (0-based) reaching the δ₁ support along `steps` odd v-arrows."""
    reach = {r for r, _ in skeleton.delta1}
    odd = skeleton.support.odd_pairs()
    for _ in range(steps):
        reach = {i - 1 for (i, j) in odd if j - 1 in reach}
    return reach


def gamma_lower_bound_two_bridge(p: int, q: int, ell: int) -> LowerBound:
    """A lower bound for Γ(ℓ) that does not depend on the unknown integers of v.

    A level-ℓ witness must involve a generator of zgrade 2ℓ-1 (mod 4) from
    which ℓ-1 admissible v-arrows lead to the δ₁ support, and that
    generator must appear in a d-cycle. The bound is the least threshold at
    which such a cycle exists.
    """
    if ell < 1:
        raise ValueError(f"the lower-bound procedure needs ℓ >= 1, got {ell}")
    q = _check_parameters(p, q)
    skeleton = two_bridge_skeleton(p, q, allow_even=True)
    candidates = _reach_delta1(skeleton, ell - 1)
    target = (2 * ell - 1) % 4
    members = [i for i, gr in enumerate(skeleton.gradings) if gr.zgrade % 4 == target]
    shifted = {i: skeleton.gradings[i].idegree + Fraction(2 * ell - 1 - skeleton.gradings[i].zgrade, 4)
               for i in members}
    pinned = q == p - 1
    for threshold in sorted(set(shifted.values())):
        support = [i for i in members if shifted[i] <= threshold]
        if not any(i in candidates for i in support):
            continue
        position = {i: c for c, i in enumerate(support)}
        rows: Dict[int, SparseRow] = {}
        for s, r, sign in skeleton.d:
            if r in position:
                rows.setdefault(s, {})[position[r]] = sign
        kernel = kernel_basis(list(rows.values()), len(support), QQ)
        hits = {i for i in support if i in candidates and any(vec.get(position[i]) for vec in kernel)}
        if hits:
            logger.debug(f"({p},{q}) Γ({ell}) lower bound {threshold} from {sorted(h + 1 for h in hits)}")
            return LowerBound(threshold, pinned and len(hits) == 1, frozenset(hits))
    return LowerBound(INFINITY, True)


def _relabelled(C: SComplex, label: str) -> SComplex:
    return SComplex(C.generators, C.d, C.v, C.delta1, C.delta2, C.ring, C.v_pinned, C.v_support, label,
                    C.notes)


def catalog_complex(knot: KnotSpec, local: bool = False, ring: RingSpec = RingSpec.GENERIC) -> SComplex:
    """The S-complex of a catalog knot expression.

    With local=True, double twist knots are replaced by their atom
    representatives. Two-bridge leaves are built with even (1,0)
    relations dropped and recorded in the complex notes.
    """
    C = _catalog_generic(knot, local)
    if ring is not RingSpec.GENERIC:
        C = C.with_ring(ring)
    return C


def _catalog_generic(knot: KnotSpec, local: bool) -> SComplex:
    if isinstance(knot, Unknot) or (isinstance(knot, Torus) and knot.is_unknot):
        return trivial_complex()
    if isinstance(knot, TwoBridge):
        return _relabelled(build_two_bridge_complex(knot.p, knot.q, allow_even=True), knot.render())
    if isinstance(knot, Torus):
        if knot.p != 2:
            raise UnsupportedKnotError(f"no S-complex for {knot.render()}; only T(2, 2k+1) is in the catalog")
        return _relabelled(torus_two_bridge_complex((knot.q - 1) // 2), knot.render())
    if isinstance(knot, DoubleTwist):
        if local:
            return _relabelled(atom(knot.local_parameter), knot.render())
        two_bridge = knot.as_two_bridge()
        return _relabelled(build_two_bridge_complex(two_bridge.p, two_bridge.q, allow_even=True), knot.render())
    if isinstance(knot, Mirror):
        return _relabelled(dual(_catalog_generic(knot.knot, local)), knot.render())
    if isinstance(knot, Sum):
        result = _catalog_generic(knot.parts[0], local)
        for part in knot.parts[1:]:
            result = tensor(result, _catalog_generic(part, local))
        return _relabelled(result, knot.render())
    raise UnsupportedKnotError(f"no S-complex for {knot!r}")


def two_bridge_catalog(max_p: int) -> Iterator[TwoBridge]:
    for p in range(3, max_p + 1, 2):
        for q in range(1, p):
            if math.gcd(p, q) == 1:
                yield TwoBridge(p, q)


def lemma_trivial_window(m: int, n: int, k1: int, k2: int) -> bool:
    """For odd k1, k2: does the lattice set for D(m,n) reduce to the origin exactly when k1 <= 2n-1 and k2 <= 2m-1?"""
    p, q = 4 * m * n - 1, 2 * n
    trivial = lattice_set(k1, k2, p, q) == {(0, 0)}
    return trivial == (k1 <= 2 * n - 1 and k2 <= 2 * m - 1)


def three_element_windows(m: int, n: int) -> List[Tuple[int, int]]:
    """Odd (k1, k2) whose lattice set is {0, ±(a0, b0)} with (a0, b0) on the box boundary."""
    p, q = 4 * m * n - 1, 2 * n
    windows = []
    for k1 in range(1, p + 1, 2):
        for k2 in range(1, p + 1, 2):
            points = lattice_set(k1, k2, p, q)
            if len(points) != 3:
                continue
            if any(pt != (0, 0) and (abs(pt[0]) == k1 or abs(pt[1]) == k2) for pt in points):
                windows.append((k1, k2))
    return windows


def predicted_three_element_windows(m: int, n: int) -> List[Tuple[int, int]]:
    p = 4 * m * n - 1
    windows = {(1, k2) for k2 in range(2 * m + 1, 4 * m * n - 2 * m, 2)}
    windows |= {(k1, 1) for k1 in range(2 * n + 1, 4 * m * n - 2 * n, 2)}
    return sorted(w for w in windows if w[0] <= p and w[1] <= p)

