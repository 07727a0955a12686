import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple

from sympy import ZZ
from sympy.polys.matrices import DomainMatrix

logger = logging.getLogger(__name__)


class KnotSyntaxError(ValueError):
    """Raised when a knot expression cannot be parsed; column is 1-based."""

    def __init__(self, message: str, column: int):
        super().__init__(f"{message} (column {column})")
        self.column = column


class UnsupportedKnotError(ValueError):
    pass


class KnotSpec:
    """Base of the knot expression tree."""

    def render(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class Unknot(KnotSpec):

    def render(self) -> str:
        return "unknot"


@dataclass(frozen=True)
class TwoBridge(KnotSpec):
    """The 2-bridge knot whose branched double cover is L(p, q); q is kept in [1, p)."""
    p: int
    q: int

    def __post_init__(self):
        if self.p < 3 or self.p % 2 == 0:
            raise ValueError(f"2-bridge parameter p must be odd and at least 3, got {self.p}")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"2-bridge parameters must be coprime, got ({self.p}, {self.q})")
        object.__setattr__(self, 'q', self.q % self.p)

    @property
    def is_torus(self) -> bool:
        return self.q == self.p - 1

    def render(self) -> str:
        return f"twobridge:{self.p},{self.q}"


@dataclass(frozen=True)
class Torus(KnotSpec):
    """Positive torus knot T_{p,q}, stored with p <= q."""
    p: int
    q: int

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError(f"torus parameters must be positive, got ({self.p}, {self.q})")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"torus parameters must be coprime, got ({self.p}, {self.q})")
        if self.p > self.q:
            p, q = self.q, self.p
            object.__setattr__(self, 'p', p)
            object.__setattr__(self, 'q', q)

    @property
    def is_unknot(self) -> bool:
        return self.p == 1

    def render(self) -> str:
        return f"torus:{self.p},{self.q}"


@dataclass(frozen=True)
class DoubleTwist(KnotSpec):
    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError(f"double twist parameters must be positive, got ({self.m}, {self.n})")

    def as_two_bridge(self) -> TwoBridge:
        return TwoBridge(4 * self.m * self.n - 1, 2 * self.n)

    @property
    def local_parameter(self) -> Fraction:
        """t of the atom locally equivalent to this knot's complex."""
        return Fraction((2 * self.m - 1) * (2 * self.n - 1), 4 * self.m * self.n - 1)

    def render(self) -> str:
        return f"dtwist:{self.m},{self.n}"


@dataclass(frozen=True)
class Mirror(KnotSpec):
    knot: KnotSpec

    def render(self) -> str:
        return f"mirror:{_render_operand(self.knot)}"


@dataclass(frozen=True)
class Sum(KnotSpec):
    parts: Tuple[KnotSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, 'parts', tuple(self.parts))
        if not self.parts:
            raise ValueError("a connected sum needs at least one summand")

    def render(self) -> str:
        first = self.parts[0]
        if len(self.parts) > 1 and all(part == first for part in self.parts):
            return f"{len(self.parts)}x({first.render()})"
        return "sum:" + "+".join(_render_operand(part) for part in self.parts)


def _render_operand(knot: KnotSpec) -> str:
    text = knot.render()
    return f"({text})" if text.startswith("sum:") else text


def multiple(knot: KnotSpec, count: int) -> KnotSpec:
    if count < 1:
        raise ValueError(f"multiplicity must be positive, got {count}")
    return knot if count == 1 else Sum((knot,) * count)


def leaves(knot: KnotSpec, mirrored: bool = False) -> Iterator[Tuple[KnotSpec, bool]]:
    """Leaves of the tree with their mirror parity."""
    if isinstance(knot, Mirror):
        yield from leaves(knot.knot, not mirrored)
    elif isinstance(knot, Sum):
        for part in knot.parts:
            yield from leaves(part, mirrored)
    else:
        yield knot, mirrored


class _Parser:
    KEYWORDS = ('twobridge', 'torus', 'dtwist', 'unknot', 'mirror', 'sum')

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str, pos: Optional[int] = None):
        raise KnotSyntaxError(message, (self.pos if pos is None else pos) + 1)

    def skip_spaces(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_spaces()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, char: str):
        if self.peek() != char:
            found = self.peek() or "end of input"
            self.error(f"expected '{char}', found '{found}'")
        self.pos += 1

    def integer(self) -> int:
        self.skip_spaces()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] == '-':
            self.pos += 1
        digits = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == digits:
            self.error("expected an integer", start)
        return int(self.text[start:self.pos])

    def word(self) -> str:
        self.skip_spaces()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isalpha():
            self.pos += 1
        return self.text[start:self.pos]

    def pair(self) -> Tuple[int, int]:
        first = self.integer()
        self.expect(',')
        return first, self.integer()

    def parse(self) -> KnotSpec:
        knot = self.expression()
        if self.peek():
            self.error(f"unexpected '{self.peek()}'")
        return knot

    def expression(self) -> KnotSpec:
        start = self.pos
        self.skip_spaces()
        if self.text.startswith('sum', self.pos) and self.text[self.pos + 3:self.pos + 4] == ':':
            self.pos += 4
            parts = [self.primary()]
            while self.peek() == '+':
                self.pos += 1
                parts.append(self.primary())
            return self.build(Sum, start, tuple(parts))
        return self.primary()

    def primary(self) -> KnotSpec:
        char = self.peek()
        start = self.pos
        if char == '(':
            self.pos += 1
            knot = self.expression()
            self.expect(')')
            return knot
        if char.isdigit():
            count = self.integer()
            if self.peek() != 'x':
                self.error("expected 'x' after a multiplicity")
            self.pos += 1
            self.expect('(')
            knot = self.expression()
            self.expect(')')
            if count < 1:
                self.error("multiplicity must be positive", start)
            return multiple(knot, count)
        keyword = self.word()
        if keyword not in self.KEYWORDS:
            self.error(f"unknown knot species '{keyword}'" if keyword else "expected a knot expression", start)
        if keyword == 'unknot':
            return Unknot()
        self.expect(':')
        if keyword == 'mirror':
            return Mirror(self.primary())
        if keyword == 'sum':
            self.pos = start
            return self.expression()
        params_at = self.pos
        a, b = self.pair()
        species = {'twobridge': TwoBridge, 'torus': Torus, 'dtwist': DoubleTwist}[keyword]
        return self.build(species, params_at, a, b)

    def build(self, species, start: int, *args) -> KnotSpec:
        try:
            return species(*args)
        except ValueError as e:
            self.skip_spaces()
            self.error(str(e), start)


def parse_knot_expr(text: str) -> KnotSpec:
    """Parse expressions such as 'sum:torus:2,3+mirror:twobridge:15,4' or '5x(dtwist:2,2)'."""
    knot = _Parser(text).parse()
    logger.debug(f"Parsed '{text}' as {knot.render()}")
    return knot


def _sign_changes(coeffs: Sequence[int]) -> int:
    signs = [c > 0 for c in coeffs if c]
    return sum(a != b for a, b in zip(signs, signs[1:]))


def _symmetric_signature(matrix: Sequence[Sequence[int]]) -> int:
    """Signature of a symmetric integer matrix.

    The characteristic polynomial of a symmetric matrix has only real
    roots, so Descartes' rule counts the positive and negative ones exactly.
    """
    n = len(matrix)
    if n == 0:
        return 0
    coeffs = [int(c) for c in DomainMatrix([[ZZ(x) for x in row] for row in matrix], (n, n), ZZ).charpoly()]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    degree = len(coeffs) - 1
    mirrored = [c if (degree - i) % 2 == 0 else -c for i, c in enumerate(coeffs)]
    return _sign_changes(coeffs) - _sign_changes(mirrored)


def even_continued_fraction(p: int, q: int) -> List[int]:
    """Even entries c with p/q' = c1 - 1/(c2 - 1/(...)), q' in {q, q - p} even."""
    a, b = Fraction(p), Fraction(q if q % 2 == 0 else q - p)
    entries = []
    while b != 0:
        c = 2 * math.floor(a / (2 * b) + Fraction(1, 2))
        if c == 0:
            c = 2 if a / b > 0 else -2
        entries.append(c)
        a, b = b, c * b - a
    return entries


@lru_cache(maxsize=None)
def two_bridge_signature(p: int, q: int) -> int:
    entries = even_continued_fraction(p, q)
    n = len(entries)
    plumbing = [[entries[i] if i == j else (1 if abs(i - j) == 1 else 0) for j in range(n)] for i in range(n)]
    return -_symmetric_signature(plumbing)


def _kronecker(X: Sequence[Sequence[int]], Y: Sequence[Sequence[int]]) -> List[List[int]]:
    return [[x * y for x in xrow for y in yrow] for xrow in X for yrow in Y]


def torus_signature(p: int, q: int) -> int:
    if min(p, q) == 1:
        return 0

    def lam(n: int) -> List[List[int]]:
        return [[-1 if i == j else (1 if j == i + 1 else 0) for j in range(n)] for i in range(n)]

    V = [[-x for x in row] for row in _kronecker(lam(p - 1), lam(q - 1))]
    size = len(V)
    return _symmetric_signature([[V[i][j] + V[j][i] for j in range(size)] for i in range(size)])


def murasugi_signature(p: int, q: int) -> int:
    q_odd = q if q % 2 == 1 else q - p
    return sum(1 if (i * q_odd // p) % 2 == 0 else -1 for i in range(1, p))


def torus_lattice_signature(p: int, q: int) -> int:
    """Lattice-point count for σ(T_{p,q})."""
    total = 0
    for i in range(1, p):
        for j in range(1, q):
            x = Fraction(i, p) + Fraction(j, q)
            total += -1 if Fraction(1, 2) < x < Fraction(3, 2) else 1
    return total


def signature(knot: KnotSpec) -> int:
    if isinstance(knot, Unknot):
        return 0
    if isinstance(knot, TwoBridge):
        return two_bridge_signature(knot.p, knot.q)
    if isinstance(knot, DoubleTwist):
        return signature(knot.as_two_bridge())
    if isinstance(knot, Torus):
        return torus_signature(knot.p, knot.q)
    if isinstance(knot, Mirror):
        return -signature(knot.knot)
    if isinstance(knot, Sum):
        return sum(signature(part) for part in knot.parts)
    raise UnsupportedKnotError(f"no signature for {knot!r}")


def _leaf_genus(leaf: KnotSpec) -> Optional[int]:
    if isinstance(leaf, Unknot) or (isinstance(leaf, Torus) and leaf.is_unknot):
        return 0
    if isinstance(leaf, Torus) and leaf.p == 2:
        return (leaf.q - 1) // 2
    if isinstance(leaf, TwoBridge) and leaf.is_torus:
        return (leaf.p - 1) // 2
    if isinstance(leaf, DoubleTwist):
        return 1
    return None


def slice_genus_hint(knot: KnotSpec) -> Optional[int]:
    """g_s when every leaf has g_s = |σ|/2 and the signatures never cancel."""
    total = 0
    signs = set()
    for leaf, mirrored in leaves(knot):
        genus = _leaf_genus(leaf)
        if genus is None:
            return None
        if genus:
            sigma = signature(leaf)
            signs.add((sigma > 0) != mirrored)
        total += genus
    if len(signs) > 1:
        return None
    return total
