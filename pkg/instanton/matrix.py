import logging
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from sympy import ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import hermite_normal_form, invariant_factors

from instanton.algebra import LAURENT

logger = logging.getLogger(__name__)

SparseRow = Dict[int, Any]
Entries = Mapping[Tuple[int, int], Any]


def sparse(shape: Tuple[int, int], entries: Optional[Entries] = None, domain=LAURENT) -> DomainMatrix:
    """Sparse DomainMatrix from a (row, col) -> value map; zero values are dropped."""
    rows, cols = shape
    dok = {}
    for (r, c), value in (entries or {}).items():
        if not (0 <= r < rows and 0 <= c < cols):
            raise IndexError(f"Entry ({r}, {c}) outside a {rows}x{cols} matrix")
        value = domain.convert(value)
        if value:
            dok[(r, c)] = value
    return DomainMatrix.from_dok(dok, (rows, cols), domain)


def identity(n: int, domain=LAURENT) -> DomainMatrix:
    return sparse((n, n), {(i, i): domain.one for i in range(n)}, domain)


def entries(matrix: DomainMatrix) -> Dict[Tuple[int, int], Any]:
    return {key: value for key, value in matrix.to_dok().items() if value}


def nonzero_entries(matrix: DomainMatrix) -> List[Tuple[int, int, Any]]:
    return [(r, c, v) for (r, c), v in sorted(entries(matrix).items(), key=lambda item: item[0])]


def is_zero(matrix: DomainMatrix) -> bool:
    return not entries(matrix)


def equal(a: DomainMatrix, b: DomainMatrix) -> bool:
    return a.shape == b.shape and entries(a) == entries(b)


def map_entries(matrix: DomainMatrix, func: Callable[[Any], Any], domain=None) -> DomainMatrix:
    """Apply func to every nonzero entry, landing in domain (default: the same domain)."""
    domain = domain or matrix.domain
    return sparse(matrix.shape, {key: func(value) for key, value in entries(matrix).items()}, domain)


def row(matrix: DomainMatrix, r: int) -> SparseRow:
    return {c: v for (rr, c), v in entries(matrix).items() if rr == r}


def column(matrix: DomainMatrix, c: int) -> SparseRow:
    return {r: v for (r, cc), v in entries(matrix).items() if cc == c}


def _from_rows(rows: Sequence[Mapping[int, Any]], ncols: int, domain) -> DomainMatrix:
    dok = {(i, c): x for i, values in enumerate(rows) for c, x in values.items() if x}
    return sparse((len(rows), ncols), dok, domain)


def rank(rows: Sequence[Mapping[int, Any]], ncols: int, domain) -> int:
    """Rank over a field of the matrix whose rows are the given sparse rows."""
    if not rows or not any(any(values.values()) for values in rows):
        return 0
    return _from_rows(rows, ncols, domain).rank()


def in_row_span(target: Mapping[int, Any], rows: Sequence[Mapping[int, Any]], ncols: int, domain) -> bool:
    if not any(target.values()):
        return True
    return rank(list(rows) + [target], ncols, domain) == rank(rows, ncols, domain)


def kernel_basis(rows: Sequence[Mapping[int, Any]], ncols: int, domain) -> List[SparseRow]:
    """Basis of {x : row . x = 0 for every row} over a field."""
    if not rows or not any(any(values.values()) for values in rows):
        return [{c: domain.one} for c in range(ncols)]
    null = _from_rows(rows, ncols, domain).nullspace()
    basis: Dict[int, SparseRow] = {}
    for (i, c), value in null.to_dok().items():
        if value:
            basis.setdefault(i, {})[c] = value
    return [basis[i] for i in sorted(basis)]


def solve(rows: Sequence[Mapping[int, Any]], rhs: Sequence[Any], ncols: int, domain) -> Optional[SparseRow]:
    """One solution of rows . x = rhs with free variables set to zero, or None if inconsistent."""
    augmented = [dict(values) for values in rows]
    for values, b in zip(augmented, rhs):
        if b:
            values[ncols] = b
    if not augmented:
        return {}
    reduced, pivots = _from_rows(augmented, ncols + 1, domain).rref()
    if ncols in pivots:
        return None
    dok = reduced.to_dok()
    solution = {}
    for i, p in enumerate(pivots):
        value = dok.get((i, ncols))
        if value:
            solution[p] = value
    return solution


def lattice_functional_gcd(functional: Mapping[int, int], constraints: Sequence[Mapping[int, int]], ncols: int) -> int:
    """Non-negative generator g of {functional(x) : x in Z^ncols, constraint . x = 0}.

    The functional goes in row 0 above the constraints. In the column Hermite
    form the pivot of row 0, when there is one, sits in the first column and
    that column is (g, 0, ..., 0); lattice vectors with all constraint
    coordinates zero are exactly its multiples.
    """
    if not any(functional.values()):
        return 0
    stacked = _from_rows([functional] + list(constraints), ncols, ZZ)
    hnf = hermite_normal_form(stacked.to_dense())
    if hnf.shape[1] == 0:
        return 0
    first = [values[0] for values in hnf.to_list()]
    if any(first[1:]):
        return 0
    return int(abs(first[0]))


def polynomial_invariant_factors(matrix_entries: Entries, shape: Tuple[int, int], domain) -> Tuple[Any, ...]:
    """Invariant factors of a matrix over a univariate polynomial ring (a PID)."""
    if 0 in shape:
        return ()
    return invariant_factors(sparse(shape, matrix_entries, domain).to_dense())


def kernel_over_fraction_field(matrix: DomainMatrix) -> List[SparseRow]:
    """Right-kernel basis of a matrix over a field such as Z(T), Q(T) or GF(2)(T)."""
    rows, cols = matrix.shape
    by_row: Dict[int, SparseRow] = {}
    for (r, c), value in entries(matrix).items():
        by_row.setdefault(r, {})[c] = value
    return kernel_basis([by_row[r] for r in sorted(by_row)], cols, matrix.domain)


def smith_normal_form(matrix_entries: Entries, shape: Tuple[int, int]) -> Tuple[int, ...]:
    """Diagonal d1 | d2 | ... of the integer Smith form, zeros last, of length min(shape)."""
    size = min(shape)
    if size == 0:
        return ()
    factors = [abs(int(f)) for f in invariant_factors(sparse(shape, matrix_entries, ZZ).to_dense())]
    nonzero = sorted(f for f in factors if f)
    return tuple(nonzero + [0] * (size - len(nonzero)))
