import itertools
import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Tuple

from instanton.algebra import LAURENT, RingSpec, laurent_str, monomial
from instanton.bound_store import BoundKind, BoundRecord
from instanton.invariants import INFINITY, GammaValue, format_value, gamma, gamma_closed_form_atoms, h_t4
from instanton.knots import (DoubleTwist, KnotSpec, Mirror, Torus, TwoBridge, UnsupportedKnotError, leaves,
                             signature, slice_genus_hint)
from instanton.twobridge import LowerBound, catalog_complex, gamma_lower_bound_two_bridge

logger = logging.getLogger(__name__)

QUARTER = Fraction(1, 4)


class HypothesisViolated(ValueError):
    """The level i of a Γ inequality is negative."""


class NoBoundError(ValueError):
    """η of the (blown up) cobordism vanishes in the coefficient ring."""


@dataclass(frozen=True)
class CobordismData:
    """A surface cobordism in a blow-up of the product, over the lattice <-1>^n.

    surface and c_class are coordinate vectors in the basis of exceptional
    classes. chi_w and sigma_w default to n and -n, the values for the
    punctured blow-up of I x S^3.
    """
    lattice_rank: int
    surface: Tuple[int, ...] = ()
    c_class: Tuple[int, ...] = ()
    genus: int = 0
    s_plus: int = 0
    s_minus: int = 0
    sigma_in: int = 0
    sigma_out: int = 0
    chi_w: Optional[int] = None
    sigma_w: Optional[int] = None
    label: str = ""

    def __post_init__(self):
        n = self.lattice_rank
        if n < 0:
            raise ValueError(f"lattice rank must be nonnegative, got {n}")
        surface = tuple(int(s) for s in self.surface) or (0,) * n
        c_class = tuple(int(c) for c in self.c_class) or (0,) * n
        if len(surface) != n or len(c_class) != n:
            raise ValueError(f"surface and c need {n} coordinates, got {len(surface)} and {len(c_class)}")
        if min(self.genus, self.s_plus, self.s_minus) < 0:
            raise ValueError("genus and double point counts must be nonnegative")
        if self.sigma_in % 2 or self.sigma_out % 2:
            raise ValueError(f"knot signatures are even, got {self.sigma_in} and {self.sigma_out}")
        object.__setattr__(self, 'surface', surface)
        object.__setattr__(self, 'c_class', c_class)

    @property
    def self_intersection(self) -> int:
        return -sum(s * s for s in self.surface)

    @property
    def chi_surface(self) -> int:
        return -2 * self.genus

    @property
    def delta_sigma(self) -> int:
        """σ(out) - σ(in)."""
        return self.sigma_out - self.sigma_in

    @property
    def euler_w(self) -> int:
        return self.lattice_rank if self.chi_w is None else self.chi_w

    @property
    def signature_w(self) -> int:
        return -self.lattice_rank if self.sigma_w is None else self.sigma_w

    def blow_up(self, modify_c: bool = False) -> 'CobordismData':
        """Resolve the positive double points by blowing up.

        Each point adds an exceptional class e with [S] picking up -2e; with
        modify_c the class c picks up -e as well, which keeps κ_min and η
        up to a unit.
        """
        count = self.s_plus
        if not count:
            return self
        return replace(
            self,
            lattice_rank=self.lattice_rank + count,
            surface=self.surface + (-2,) * count,
            c_class=self.c_class + ((-1,) if modify_c else (0,)) * count,
            s_plus=0,
            chi_w=None if self.chi_w is None else self.chi_w + count,
            sigma_w=None if self.sigma_w is None else self.sigma_w - count,
        )

    def suspend(self, count: int, ring: RingSpec = RingSpec.GENERIC) -> 'CobordismData':
        """Boundary sum with `count` copies of a CP̄² conic, moving the outgoing knot to K' # count T.

        Over rings with T^4 ≠ 1 the summand is (CP̄² - B⁴, S₂) and T = T(2,3); with
        T^4 = 1 it is (CP̄² - B⁴, S₃) and T = T(3,4). Either way the level grows by count.
        """
        if count < 0:
            raise ValueError(f"suspension count must be nonnegative, got {count}")
        if not count:
            return self
        degree, knot = (3, Torus(3, 4)) if ring is RingSpec.T4 else (2, Torus(2, 3))
        label = f"{self.label or 'K'} # {count}x({knot.render()})"
        return replace(
            self,
            lattice_rank=self.lattice_rank + count,
            surface=self.surface + (degree,) * count,
            c_class=self.c_class + (0,) * count,
            sigma_out=self.sigma_out + count * signature(knot),
            chi_w=None if self.chi_w is None else self.chi_w + count,
            sigma_w=None if self.sigma_w is None else self.sigma_w - count,
            label=label,
        )


@dataclass(frozen=True)
class ReducibleSummary:
    kappa_min: Fraction
    minimizers: Tuple[Tuple[int, ...], ...]
    eta: Any
    nu_values: Tuple[int, ...]
    index_min: Fraction
    level: Optional[int]
    self_intersection: int

    @property
    def nu_values_centred(self) -> Tuple[Fraction, ...]:
        """Monopole numbers without the self-intersection correction, i.e. ν + S·S/2."""
        shift = Fraction(self.self_intersection, 2)
        return tuple(sorted(nu + shift for nu in self.nu_values))

    @property
    def level_label(self) -> str:
        return "not-half-odd" if self.level is None else str(self.level)

    def to_dict(self) -> Dict[str, object]:
        return {
            'kappa_min': format_value(self.kappa_min),
            'minimizers': [list(z) for z in self.minimizers],
            'eta': laurent_str(self.eta),
            'nu': list(self.nu_values),
            'index': format_value(self.index_min),
            'level': self.level_label,
        }


def _nearest_integers(target: Fraction) -> Tuple[Fraction, List[int]]:
    low = math.floor(target)
    distances = {z: (z - target) ** 2 for z in (low, low + 1)}
    best = min(distances.values())
    return best, [z for z, dist in sorted(distances.items()) if dist == best]


def reducible_summary(data: CobordismData, ring: RingSpec = RingSpec.GENERIC) -> ReducibleSummary:
    """Minimal reducibles of (W, S, c) over the diagonal lattice.

    κ(z) = Σ (z_i + s_i/4 - c_i/2)², minimised coordinate by coordinate;
    each minimiser contributes (-1)^(z·z) T^ν with ν = (2z - c)·S.
    """
    kappa = Fraction(0)
    choices: List[List[int]] = []
    for s, c in zip(data.surface, data.c_class):
        best, zs = _nearest_integers(Fraction(c, 2) - Fraction(s, 4))
        kappa += best
        choices.append(zs)
    minimizers = tuple(itertools.product(*choices))
    if len(minimizers) > 64:
        logger.debug(f"{len(minimizers)} minimal reducibles on a rank {data.lattice_rank} lattice")
    eta = LAURENT.zero
    nus = set()
    for z in minimizers:
        square = sum(zi * zi for zi in z)
        nu = -sum((2 * zi - c) * s for zi, c, s in zip(z, data.c_class, data.surface))
        nus.add(nu)
        eta = eta + monomial(nu, -1 if square % 2 else 1)
    eta = ring.reduce(eta)
    index = (8 * kappa - Fraction(3, 2) * (data.euler_w + data.signature_w) + data.chi_surface
             + Fraction(data.self_intersection, 2) + data.sigma_in - data.sigma_out - 1)
    level = None
    if index.denominator == 1 and index.numerator % 2:
        level = (index.numerator + 1) // 2
    return ReducibleSummary(kappa, minimizers, eta, tuple(sorted(nus)), index, level,
                            data.self_intersection)


def _describe(data: CobordismData) -> str:
    return data.label or "W"


def _base_inputs(record: BoundRecord, data: CobordismData, summary: ReducibleSummary):
    name = _describe(data)
    record.add_input('kappa_min', name, summary.kappa_min)
    record.add_input('self_intersection', name, Fraction(data.self_intersection))
    record.add_input('genus', name, Fraction(data.genus))
    record.add_input('sigma_in', name, Fraction(data.sigma_in))
    record.add_input('sigma_out', name, Fraction(data.sigma_out))
    if data.s_plus:
        record.add_input('s_plus', name, Fraction(data.s_plus))


def _check_eta(data: CobordismData, ring: RingSpec) -> ReducibleSummary:
    blown = reducible_summary(data.blow_up(modify_c=ring is RingSpec.T4), ring)
    if not blown.eta:
        raise NoBoundError(f"η vanishes over {ring.value} for {_describe(data)}; no morphism of the required level")
    return blown


def h_shift_bound(data: CobordismData, ring: RingSpec = RingSpec.GENERIC) -> BoundRecord:
    """h(K') - h(K) >= 4κ_min - g + S·S/4 - ε - (σ(K') - σ(K))/2, with ε = s₊ when T^4 = 1."""
    _check_eta(data, ring)
    summary = reducible_summary(data, ring)
    epsilon = data.s_plus if ring is RingSpec.T4 else 0
    rhs = (4 * summary.kappa_min - data.genus + Fraction(data.self_intersection, 4) - epsilon
           - Fraction(data.delta_sigma, 2))
    record = BoundRecord(BoundKind.H_SHIFT, _describe(data), f"h(K') - h(K) >= {format_value(rhs)}", rhs,
                         notes={'ring': ring.value, 'epsilon': epsilon})
    _base_inputs(record, data, summary)
    if data.s_plus:
        # immersed maps carry the normalisation (-1)^{s+} T^{-2 s+}
        record.notes['normalisation'] = f"(-1)^{data.s_plus} T^{-2 * data.s_plus}"
    logger.info(f"h-shift bound for {_describe(data)} over {ring.value}: {record.statement}")
    return record


def epsilon_r(ring: RingSpec, degree: int, s_plus: int = 0) -> Fraction:
    """Correction term for a surface of the given degree in a single CP̄² summand."""
    if ring is RingSpec.T4:
        return Fraction(0) if degree % 2 == 0 else QUARTER
    if degree == 0:
        return Fraction(s_plus)
    if degree % 2 == 0:
        return Fraction(1 + s_plus)
    return QUARTER + s_plus


def _require_integral_level(i: Fraction, data: CobordismData) -> int:
    if i.denominator != 1:
        raise ValueError(f"level {i} for {_describe(data)} is not an integer; check the signatures and degree")
    if i < 0:
        raise HypothesisViolated(f"level i = {i} < 0 for {_describe(data)}; "
                                 f"suspend({-i}) moves the outgoing knot into range")
    return int(i)


def gamma_shift_bound(data: CobordismData, k: int, ring: RingSpec = RingSpec.GENERIC,
                      blow_up_degree: Optional[int] = None,
                      gamma_in: Optional[GammaValue] = None) -> BoundRecord:
    """Γ_{K'}(k + i) <= constant + Γ_K(k) for a cobordism with level i >= 0.

    Without blow_up_degree the immersed-surface version is used. With it,
    the cobordism is I x S^3 # CP̄² and the surface has that degree.
    """
    if blow_up_degree is not None:
        if data.lattice_rank and (data.lattice_rank != 1 or abs(data.surface[0]) != abs(blow_up_degree)):
            raise ValueError(f"surface {data.surface} does not have degree {blow_up_degree} in a single CP̄²")
        eps = epsilon_r(ring, blow_up_degree, data.s_plus)
        i = (eps - Fraction(blow_up_degree ** 2, 4) - data.s_plus - Fraction(data.delta_sigma, 2)
             - data.genus)
        constant = eps / 2
        summary = None
    else:
        _check_eta(data, ring)
        summary = reducible_summary(data, ring)
        eps = Fraction(data.s_plus if ring is RingSpec.T4 else 0)
        i = (4 * summary.kappa_min - data.genus + Fraction(data.self_intersection, 4) - eps
             - Fraction(data.delta_sigma, 2))
        constant = 2 * summary.kappa_min + (data.s_plus - eps) / 2
    level = _require_integral_level(i, data)
    tail = f"Γ_K({k})" if gamma_in is None else format_value(gamma_in)
    if gamma_in is None:
        value = constant
    elif gamma_in == INFINITY:
        value = INFINITY
    else:
        value = constant + gamma_in
    statement = f"Γ_K'({k + level}) <= {format_value(constant)} + {tail}"
    if gamma_in is not None:
        statement += f" = {format_value(value)}"
    record = BoundRecord(BoundKind.GAMMA_SHIFT, _describe(data), statement, value,
                         notes={'ring': ring.value, 'i': level, 'constant': format_value(constant),
                                'epsilon': format_value(eps), 'k': k})
    if blow_up_degree is not None:
        record.notes['degree'] = blow_up_degree
    if summary is not None:
        _base_inputs(record, data, summary)
    if gamma_in is not None:
        record.add_input('gamma_in', _describe(data), gamma_in)
    logger.info(f"Γ-shift bound for {_describe(data)}: {statement}")
    return record


def _two_bridge_leaf(knot: KnotSpec) -> Optional[TwoBridge]:
    if isinstance(knot, TwoBridge):
        return knot
    if isinstance(knot, Mirror) and isinstance(knot.knot, TwoBridge):
        return TwoBridge(knot.knot.p, knot.knot.p - knot.knot.q)
    return None


def gamma_lower_bound(knot: KnotSpec, k: int) -> LowerBound:
    """A certified lower bound for Γ_K(k); exact when the complex is known exactly.

    Sums of double twist knots use the minimal subset sum of their atom
    parameters; other catalog knots are evaluated on their local
    representatives. A single 2-bridge knot uses the v-independent
    lower bound. Anything else needs a pinned v map.
    """
    parts = list(leaves(knot))
    if parts and all(isinstance(leaf, DoubleTwist) and not mirrored for leaf, mirrored in parts):
        return LowerBound(gamma_closed_form_atoms([leaf.local_parameter for leaf, _ in parts], k), True)
    leaf = _two_bridge_leaf(knot)
    if leaf is not None and not leaf.is_torus:
        if k <= 0:
            return LowerBound(Fraction(0), False)
        return gamma_lower_bound_two_bridge(leaf.p, leaf.q, k)
    C = catalog_complex(knot, local=True)
    if not C.v_pinned:
        raise UnsupportedKnotError(f"Γ of {knot.render()} needs a pinned v map")
    return LowerBound(gamma(C, k), True)


def _ceil(value: Fraction) -> int:
    return -((-value.numerator) // value.denominator)


def concordance_bounds(knot: KnotSpec, upper_hints: Optional[Mapping[BoundKind, int]] = None) -> List[BoundRecord]:
    """Clasp, unknotting and crosscap lower bounds with optional equality certificates.

    upper_hints maps UNKNOTTING or CLASP_PLUS to a known upper bound; an
    unknotting upper bound also bounds c_s⁺.
    """
    name = knot.render()
    records: List[BoundRecord] = []
    sigma = signature(knot)
    level = -sigma // 2
    clasp_value: Optional[int] = None
    if level >= 1:
        try:
            bound = gamma_lower_bound(knot, level)
        except UnsupportedKnotError as e:
            logger.warning(f"No Γ bound for {name}: {e}")
            bound = None
        if bound is not None and bound.value != INFINITY:
            clasp_value = _ceil(2 * bound.value)
            relation = "=" if bound.exact else ">="
            for kind, symbol in ((BoundKind.CLASP_PLUS, "c_s+"), (BoundKind.UNKNOTTING, "u")):
                record = BoundRecord(kind, name, f"{symbol}(K) >= ceil(2 Γ_K({level})) = {clasp_value}", clasp_value,
                                     notes={'gamma': f"Γ({level}) {relation} {format_value(bound.value)}"})
                record.add_input('signature', name, Fraction(sigma))
                record.add_input(f"gamma({level})", name, bound.value)
                records.append(record)
            genus = slice_genus_hint(knot)
            if genus is not None:
                gap = BoundRecord(BoundKind.CLASP_PLUS, name, f"c_s+(K) - g_s(K) >= {clasp_value - genus}",
                                  clasp_value - genus, notes={'quantity': 'c_s+ - g_s'})
                gap.add_input('slice_genus', name, Fraction(genus))
                gap.add_input('clasp_plus', name, Fraction(clasp_value))
                records.append(gap)
        elif bound is not None:
            logger.warning(f"Γ_{name}({level}) has no finite lower bound; h < {level} contradicts σ = {sigma}")
    try:
        h = h_t4(knot)
    except UnsupportedKnotError as e:
        logger.debug(f"No T^4 = 1 h for {name}: {e}")
    else:
        record = BoundRecord(BoundKind.CROSSCAP, name, f"γ4(K) >= |h_t4(K)| = {abs(h)}", abs(h))
        record.add_input('h_t4', name, Fraction(h))
        records.append(record)
    for hint_kind, upper in sorted((upper_hints or {}).items(), key=lambda item: item[0].value):
        if clasp_value is None:
            continue
        if clasp_value > upper:
            raise ValueError(f"upper bound {upper} for {hint_kind.value} of {name} is below the lower bound {clasp_value}")
        if clasp_value == upper:
            statement = ("u(K) = c_s+(K) = " if hint_kind is BoundKind.UNKNOTTING else "c_s+(K) = ") + str(upper)
            certificate = BoundRecord(hint_kind, name, statement, upper, certificate=True)
            certificate.add_input('upper_hint', name, Fraction(upper))
            certificate.add_input('clasp_plus', name, Fraction(clasp_value))
            records.append(certificate)
            logger.info(f"Certified {statement} for {name}")
    return records


def twist_bound(d: int, sigma_in: int, sigma_out: int) -> BoundRecord:
    """T^4 = 1 bound for a full twist on strands of algebraic linking d: -floor(d²/4) - Δσ/2."""
    c = (abs(d) // 2) % 2 if d % 2 == 0 else 0
    data = CobordismData(1, (d,), (c,), sigma_in=sigma_in, sigma_out=sigma_out, label=f"twist(d={d})")
    return h_shift_bound(data, RingSpec.T4)


def torus_staircase_bound(m: int) -> BoundRecord:
    """h(T(m, m+1)) >= (m-1)/2 from the degree-m curve in CP̄² - B⁴, m odd."""
    if m < 1 or m % 2 == 0:
        raise ValueError(f"m must be a positive odd integer, got {m}")
    knot = Torus(m, m + 1)
    data = CobordismData(1, (m,), sigma_out=signature(knot), label=f"U -> {knot.render()}")
    return h_shift_bound(data, RingSpec.GENERIC)


def nonorientable_bound(chi_s: int, self_int: int, sigma_in: int, sigma_out: int) -> BoundRecord:
    """h_Z(K') - h_Z(K) >= χ/2 + S·S/4 + (σ(K) - σ(K'))/2 for a possibly non-orientable S in I x S^3."""
    value = Fraction(chi_s, 2) + Fraction(self_int, 4) + Fraction(sigma_in - sigma_out, 2)
    record = BoundRecord(BoundKind.H_SHIFT, "S", f"h_Z(K') - h_Z(K) >= {format_value(value)}", value,
                         notes={'ring': 'integers', 'orientable': False})
    record.add_input('euler_characteristic', "S", Fraction(chi_s))
    record.add_input('self_intersection', "S", Fraction(self_int))
    record.add_input('sigma_in', "S", Fraction(sigma_in))
    record.add_input('sigma_out', "S", Fraction(sigma_out))
    return record


def cp2bar_slice_obstruction(knot: KnotSpec, degree: int, ring: RingSpec = RingSpec.GENERIC,
                             genus: int = 0) -> Optional[BoundRecord]:
    """Can K bound a surface of the given degree and genus in the punctured CP̄²?

    Returns a SLICE_OBSTRUCTION record when the forced upper bound on
    Γ_K(i) is beaten by its computed lower bound, else None.
    """
    sigma = signature(knot)
    data = CobordismData(1, (degree,), genus=genus, sigma_out=sigma,
                         label=f"unknot -> {knot.render()} (degree {degree})")
    forced = gamma_shift_bound(data, 0, ring, blow_up_degree=degree, gamma_in=Fraction(0))
    level = forced.notes['i']
    bound = gamma_lower_bound(knot, level)
    if bound.value > forced.value:
        statement = (f"{knot.render()} bounds no genus {genus} surface of degree {degree} in CP̄²: "
                     f"Γ({level}) >= {format_value(bound.value)} > {format_value(forced.value)}")
        record = BoundRecord(BoundKind.SLICE_OBSTRUCTION, knot.render(), statement, bound.value, certificate=True,
                             notes={'degree': degree, 'i': level, 'forced': format_value(forced.value)})
        record.add_input(f"gamma({level})", knot.render(), bound.value)
        record.add_input('signature', knot.render(), Fraction(sigma))
        logger.info(statement)
        return record
    logger.info(f"No CP̄² obstruction for {knot.render()} in degree {degree}")
    return None
