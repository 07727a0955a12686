import logging
from enum import Enum
from typing import Dict, Mapping, Optional, Union

from sympy import GF, QQ, ZZ, Symbol

logger = logging.getLogger(__name__)

T_SYMBOL = Symbol('T')

# Laurent polynomials live in the fraction field Z(T) as elements whose
# denominator is a power of T. Arithmetic, cancellation and hashing are sympy's.
LAURENT = ZZ.frac_field(T_SYMBOL)
CHAR2_FIELD = GF(2).frac_field(T_SYMBOL)

T = LAURENT.gens[0]
EPSILON = T ** 2 - T ** -2


def laurent(terms: Mapping[int, int], domain=LAURENT):
    """Element sum(c * T^e) of the given fraction field from an exponent -> coefficient map."""
    field = domain.field
    ring = field.ring
    terms = {int(e): c for e, c in terms.items() if c}
    if not terms:
        return field.zero
    low = min(min(terms), 0)
    numer = ring.from_dict({(e - low,): c for e, c in terms.items()})
    return field.new(numer, ring.gens[0] ** (-low))


def monomial(exponent: int = 1, coeff: int = 1, domain=LAURENT):
    return laurent({exponent: coeff}, domain)


def laurent_terms(x) -> Dict[int, int]:
    """Exponent -> coefficient map of a Laurent polynomial.

    Raises ValueError for fractions whose denominator is not a power of T.
    """
    if not x:
        return {}
    denominator = x.denom.terms()
    if len(denominator) != 1 or int(denominator[0][1]) != 1:
        raise ValueError(f"{x.as_expr()} is not a Laurent polynomial")
    shift = denominator[0][0][0]
    return {monom[0] - shift: int(coeff) for monom, coeff in x.numer.terms()}


def coerce(value):
    """Interpret an int or a Laurent polynomial as an element of LAURENT."""
    if LAURENT.of_type(value):
        return value
    if isinstance(value, int):
        return LAURENT.convert(value)
    raise TypeError(f"Cannot interpret {type(value).__name__} as a Laurent polynomial")


def laurent_str(x) -> str:
    terms = laurent_terms(x)
    if not terms:
        return "0"
    parts = []
    for e, c in sorted(terms.items()):
        mag = abs(c)
        if e == 0:
            body = str(mag)
        else:
            power = "T" if e == 1 else f"T^{e}"
            body = power if mag == 1 else f"{mag}*{power}"
        if not parts:
            parts.append(f"-{body}" if c < 0 else body)
        else:
            parts.append(f"- {body}" if c < 0 else f"+ {body}")
    return " ".join(parts)


def laurent_to_json(x) -> Dict[str, int]:
    return {str(e): c for e, c in sorted(laurent_terms(x).items())}


def laurent_from_json(data: Mapping[str, int]):
    return laurent({int(e): int(c) for e, c in data.items()})


class RingSpec(Enum):
    """Coefficient ring for matrix entries.

    Entries are always stored in LAURENT; reduce() brings them to the
    canonical representative of their class in the chosen ring.
    """
    GENERIC = "generic"
    T4 = "t4"
    CHAR2 = "char2"

    @classmethod
    def from_name(cls, name: Union[str, 'RingSpec']) -> 'RingSpec':
        if isinstance(name, RingSpec):
            return name
        aliases = {
            'generic': cls.GENERIC,
            't4': cls.T4,
            't4-quotient': cls.T4,
            'char2': cls.CHAR2,
            'char2-generic': cls.CHAR2,
        }
        try:
            return aliases[name.strip().lower()]
        except KeyError:
            raise ValueError(f"Unknown ring '{name}' (expected generic, t4 or char2)")

    @property
    def characteristic(self) -> int:
        return 2 if self is RingSpec.CHAR2 else 0

    def reduce(self, value):
        x = coerce(value)
        if self is RingSpec.T4:
            folded: Dict[int, int] = {}
            for e, c in laurent_terms(x).items():
                folded[e % 4] = folded.get(e % 4, 0) + c
            return laurent(folded)
        if self is RingSpec.CHAR2:
            return laurent({e: c % 2 for e, c in laurent_terms(x).items()})
        return x

    @property
    def epsilon(self):
        return self.reduce(EPSILON)

    def is_zero(self, value) -> bool:
        return not self.reduce(value)

    @property
    def field(self):
        """Field the invariants of a complex over this ring are computed in."""
        if self is RingSpec.T4:
            return QQ
        if self is RingSpec.CHAR2:
            return CHAR2_FIELD
        return LAURENT

    def field_element(self, value):
        """Image of a ring element in self.field.

        The T^4 = 1 quotient is not a domain; it is evaluated at T = 1.
        """
        x = coerce(value)
        if self is RingSpec.T4:
            return QQ(sum(laurent_terms(x).values()))
        if self is RingSpec.CHAR2:
            return laurent(laurent_terms(x), CHAR2_FIELD)
        return x


def laurent_arith(a, b, op: str, ring: RingSpec = RingSpec.GENERIC):
    """a + b, a * b or -a, reduced in ring. b is ignored for neg."""
    if op == 'add':
        value = coerce(a) + coerce(b)
    elif op == 'mul':
        value = coerce(a) * coerce(b)
    elif op == 'neg':
        value = -coerce(a)
    else:
        raise ValueError(f"Unknown operation '{op}' (expected add, mul or neg)")
    return ring.reduce(value)


def epsilon_multiple(value, ring: RingSpec = RingSpec.GENERIC) -> Optional[int]:
    """Return n if value == n*(T^2 - T^-2) in the ring, otherwise None."""
    x = ring.reduce(value)
    if not x:
        return 0
    n = laurent_terms(x).get(2, 0)
    if n and ring.reduce(EPSILON * n) == x:
        return n
    return None
