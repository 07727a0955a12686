import logging
import math
import queue
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

from instanton.bound_store import BoundKind, BoundRecord
from instanton.cobordism import concordance_bounds, cp2bar_slice_obstruction
from instanton.config_manager import ConfigManager
from instanton.equivariant import ideal_Ik, z_hat_structured
from instanton.invariants import (INFINITY, format_value, gamma_closed_form_atoms, gamma_function, h_bounds,
                                  h_field)
from instanton.knots import DoubleTwist, Torus, TwoBridge, multiple, signature
from instanton.matrix import nonzero_entries
from instanton.scomplex import atom, tensor
from instanton.twobridge import (build_two_bridge_complex, catalog_complex, gamma_lower_bound_two_bridge,
                                 two_bridge_catalog)

logger = logging.getLogger(__name__)

Cells = Dict[str, str]
RowOutput = Tuple[Cells, List[BoundRecord]]

# (name, p, q, unknotting upper bound, level, Γ lower bound)
ELEVEN_A = (
    ("11a192", 97, 26, 3, 2, Fraction(104, 97)),
    ("11a341", 61, 42, 3, 2, Fraction(62, 61)),
    ("11a360", 57, 10, 3, 2, Fraction(62, 57)),
    ("11a365", 51, 16, 4, 3, Fraction(27, 17)),
)

FIGURE_15_4 = {1: (2, Fraction(11, 15)), 2: (3, Fraction(14, 15)), 3: (1, Fraction(9, 15)),
               4: (2, Fraction(11, 15)), 5: (4, Fraction(20, 15)), 6: (5, Fraction(21, 15)),
               7: (3, Fraction(14, 15))}
FIGURE_51_16 = {3: (1, Fraction(9, 51)), 6: (3, Fraction(36, 51)), 9: (5, Fraction(81, 51))}
FIGURE_51_16_CHAIN = (Fraction(3, 17), Fraction(12, 17), Fraction(27, 17))


class UnknownTableError(ValueError):
    pass


@dataclass
class RowTask:
    key: str
    compute: Callable[[], RowOutput]
    expected: Cells


@dataclass
class TableRow:
    key: str
    cells: Cells
    expected: Cells
    records: List[BoundRecord] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def mismatches(self) -> List[str]:
        if self.error:
            return ['error']
        return [column for column, value in self.expected.items() if self.cells.get(column) != value]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {'key': self.key, 'cells': dict(self.cells), 'ok': self.ok}
        if not self.ok:
            data['expected'] = dict(self.expected)
        if self.error:
            data['error'] = self.error
        return data


@dataclass
class TableResult:
    name: str
    rows: List[TableRow]

    @property
    def ok(self) -> bool:
        return all(row.ok for row in self.rows)

    @property
    def records(self) -> List[BoundRecord]:
        return [record for row in self.rows for record in row.records]

    def columns(self) -> List[str]:
        seen: List[str] = []
        for row in self.rows:
            for column in list(row.cells) + list(row.expected):
                if column not in seen:
                    seen.append(column)
        return seen

    def render(self) -> str:
        columns = self.columns()
        lines = [f"# {self.name}", "\t".join(["row"] + columns + ["status"])]
        for row in self.rows:
            status = "ok" if row.ok else "MISMATCH " + ",".join(row.mismatches)
            values = [row.cells.get(column, "-") for column in columns]
            lines.append("\t".join([row.key] + values + [status]))
        failed = sum(1 for row in self.rows if not row.ok)
        lines.append(f"# {len(self.rows)} rows, {failed} mismatches")
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        return {'table': self.name, 'ok': self.ok, 'rows': [row.to_dict() for row in self.rows]}


def _fmt(value) -> str:
    return format_value(value)


def _records_by_kind(records: List[BoundRecord], kind: BoundKind) -> List[BoundRecord]:
    return [record for record in records if record.kind is kind]


def clasp74_tasks(rows: int) -> List[RowTask]:
    def compute(n: int) -> RowOutput:
        knot = multiple(DoubleTwist(2, 2), n)
        records = concordance_bounds(knot)
        clasp = [r for r in _records_by_kind(records, BoundKind.CLASP_PLUS) if 'quantity' not in r.notes]
        gap = [r for r in _records_by_kind(records, BoundKind.CLASP_PLUS) if r.notes.get('quantity')]
        cells = {
            'sigma': str(signature(knot)),
            'gamma': clasp[0].inputs[-1]['value'] if clasp else "-",
            'clasp_plus': _fmt(clasp[0].value) if clasp else "-",
            'gap': _fmt(gap[0].value) if gap else "-",
        }
        return cells, clasp + gap

    tasks = []
    for n in range(1, rows + 1):
        expected = {'sigma': str(-2 * n), 'gamma': _fmt(Fraction(3 * n, 5)),
                    'clasp_plus': str(math.ceil(Fraction(6 * n, 5))), 'gap': str(math.ceil(Fraction(n, 5)))}
        tasks.append(RowTask(f"{n}x(7_4)", lambda n=n: compute(n), expected))
    return tasks


def _torus_expected(k: int, ks: range) -> Cells:
    p = 2 * k + 1
    cells = {}
    for i in ks:
        value = Fraction(0) if i <= 0 else (INFINITY if i > k else Fraction(i * i, p))
        cells[f"G({i})"] = _fmt(value)
    return cells


def gamma_torus_tasks(max_k: int) -> List[RowTask]:
    ks = range(-1, max_k + 2)

    def compute(k: int) -> RowOutput:
        C = catalog_complex(TwoBridge(2 * k + 1, 2 * k))
        values = gamma_function(C, ks)
        return {f"G({i})": _fmt(values[i]) for i in ks}, []

    return [RowTask(f"T(2,{2 * k + 1})", lambda k=k: compute(k), _torus_expected(k, ks))
            for k in range(1, max_k + 1)]


def gamma_dtwist_tasks(max_mn: int, max_k: int) -> List[RowTask]:
    """Γ of k copies of D(m,n) along the tensor product of atoms and by the subset-sum formula."""

    def compute(m: int, n: int) -> RowOutput:
        t = DoubleTwist(m, n).local_parameter
        cells: Cells = {}
        C = atom(t)
        for k in range(1, max_k + 1):
            if k > 1:
                C = tensor(C, atom(t))
            values = gamma_function(C, range(1, k + 1))
            closed = [gamma_closed_form_atoms([t] * k, i) for i in range(1, k + 1)]
            agree = all(values[i] == closed[i - 1] for i in range(1, k + 1))
            cells[f"k={k}"] = _fmt(values[k]) if agree else "tensor!=closed"
        return cells, []

    tasks = []
    for m in range(1, max_mn + 1):
        for n in range(1, max_mn + 1):
            t = DoubleTwist(m, n).local_parameter
            expected = {f"k={k}": _fmt(k * t) for k in range(1, max_k + 1)}
            tasks.append(RowTask(f"D({m},{n})", lambda m=m, n=n: compute(m, n), expected))
    return tasks


def eleven_a_tasks() -> List[RowTask]:
    def compute(p: int, q: int, upper: int, level: int) -> RowOutput:
        knot = TwoBridge(p, q)
        records = concordance_bounds(knot, {BoundKind.UNKNOTTING: upper})
        bound = gamma_lower_bound_two_bridge(p, q, level)
        certified = [r for r in records if r.certificate]
        cells = {
            'level': str(-signature(knot) // 2),
            'gamma_lb': _fmt(bound.value),
            'u': _fmt(certified[0].value) if certified else "-",
        }
        return cells, records

    return [RowTask(f"{name}=({p},{q})", lambda p=p, q=q, u=u, lvl=lvl: compute(p, q, u, lvl),
                    {'level': str(lvl), 'gamma_lb': _fmt(lb), 'u': str(u)})
            for name, p, q, u, lvl, lb in ELEVEN_A]


def ideals_trefoil_tasks(max_k: int = 5) -> List[RowTask]:
    def compute(k: int) -> RowOutput:
        ideal = ideal_Ik(k, torus=True)
        z_hat = z_hat_structured(multiple(Torus(2, 3), k))
        cells = {
            'generators': ideal.render(),
            'gradings': " ".join(str(gr) for gr in ideal.gradings),
            'zhat': "I^k" if z_hat == ideal else z_hat.render(),
        }
        return cells, []

    tasks = []
    for k in range(1, max_k + 1):
        expected_gradings = " ".join(f"({2 * i}, {Fraction(i * i, 2 * k + 1)})" for i in range(k + 1))
        tasks.append(RowTask(f"I^{k}", lambda k=k: compute(k), {'gradings': expected_gradings, 'zhat': "I^k"}))
    return tasks


def _grading_cell(zgrade: int, idegree: Fraction) -> str:
    return f"{zgrade},{_fmt(idegree)}"


def skeleton_tasks() -> List[RowTask]:
    def compute_15_4() -> RowOutput:
        C = build_two_bridge_complex(15, 4, allow_even=True)
        cells = {f"z{i + 1}": _grading_cell(C.zgrade(i), C.idegree(i)) for i in range(C.rank)}
        cells['delta1'] = " ".join(C.name(c) for _, c, _ in nonzero_entries(C.delta1)) or "0"
        cells['delta2'] = " ".join(C.name(r) for r, _, _ in nonzero_entries(C.delta2)) or "0"
        return cells, []

    def compute_51_16() -> RowOutput:
        C = build_two_bridge_complex(51, 16, allow_even=True)
        cells = {f"z{i}": _grading_cell(C.zgrade(i - 1), C.idegree(i - 1)) for i in FIGURE_51_16}
        for ell in range(1, len(FIGURE_51_16_CHAIN) + 1):
            cells[f"LB({ell})"] = _fmt(gamma_lower_bound_two_bridge(51, 16, ell).value)
        return cells, []

    def compute_7_4() -> RowOutput:
        record = cp2bar_slice_obstruction(DoubleTwist(2, 2), 2)
        return {'obstructed': "yes" if record is not None else "no"}, [record] if record else []

    expected_15_4 = {f"z{i}": _grading_cell(z, t) for i, (z, t) in FIGURE_15_4.items()}
    expected_15_4.update({'delta1': "z3", 'delta2': "0"})
    expected_51_16 = {f"z{i}": _grading_cell(z, t) for i, (z, t) in FIGURE_51_16.items()}
    expected_51_16.update({f"LB({ell})": _fmt(v) for ell, v in enumerate(FIGURE_51_16_CHAIN, start=1)})
    return [
        RowTask("(15,4)", compute_15_4, expected_15_4),
        RowTask("(51,16)", compute_51_16, expected_51_16),
        RowTask("7_4 in CP2bar, degree 2", compute_7_4, {'obstructed': "yes"}),
    ]


def signature_rule_tasks(max_p: int, max_k: int, max_mn: int = 4) -> List[RowTask]:
    """h = -σ/2 on pinned complexes, and -σ/2 inside the h bracket of every catalog complex.

    The pinned rows compute h from the torus and double twist closed forms;
    the signatures come from the knot data alone.
    """
    by_p: Dict[int, List[TwoBridge]] = {}
    for knot in two_bridge_catalog(max_p):
        by_p.setdefault(knot.p, []).append(knot)

    def compute_bracket(knots: List[TwoBridge]) -> RowOutput:
        outside = []
        exact = 0
        for knot in knots:
            expected = -signature(knot) // 2
            try:
                bounds = h_bounds(catalog_complex(knot))
            except ValueError as e:
                logger.warning(f"Signature rule check for {knot.render()} failed: {type(e).__name__}: {e}")
                outside.append(knot.render())
                continue
            if expected not in bounds:
                outside.append(knot.render())
            elif bounds.exact is not None:
                exact += 1
        return {'checked': str(len(knots)), 'outside': " ".join(outside) or "0", 'exact': str(exact)}, []

    def compute_pinned(knot) -> RowOutput:
        return {'h': str(h_field(catalog_complex(knot, local=True)))}, []

    tasks = [RowTask(f"p={p}", lambda knots=knots: compute_bracket(knots),
                     {'checked': str(len(knots)), 'outside': "0"})
             for p, knots in sorted(by_p.items())]
    pinned: List[Any] = [Torus(2, 2 * k + 1) for k in range(1, max_k + 1)]
    pinned += [DoubleTwist(m, n) for m in range(1, max_mn + 1) for n in range(1, max_mn + 1)]
    tasks += [RowTask(knot.render(), lambda knot=knot: compute_pinned(knot), {'h': str(-signature(knot) // 2)})
              for knot in pinned]
    return tasks


TABLES = ("clasp74", "gamma-torus2", "gamma-dtwist", "eleven-a", "ideals-trefoil",
          "skeleton-two-bridge", "signature-rule")


class ReproductionRunner:
    """Evaluates the rows of a reproduction table on a pool of worker threads."""

    def __init__(self, config_manager: Optional[ConfigManager] = None, workers: Optional[int] = None):
        self.config_manager = config_manager or ConfigManager()
        self.workers = max(1, workers or self.config_manager.get_int("REPRODUCE_WORKERS"))
        self._lock = threading.Lock()

    def tasks_for(self, name: str) -> List[RowTask]:
        config = self.config_manager
        if name == "clasp74":
            return clasp74_tasks(config.get_int("CLASP74_ROWS"))
        if name == "gamma-torus2":
            return gamma_torus_tasks(config.get_int("TORUS_MAX_K"))
        if name == "gamma-dtwist":
            return gamma_dtwist_tasks(config.get_int("DTWIST_MAX_MN"), config.get_int("DTWIST_MAX_K"))
        if name == "eleven-a":
            return eleven_a_tasks()
        if name == "ideals-trefoil":
            return ideals_trefoil_tasks()
        if name == "skeleton-two-bridge":
            return skeleton_tasks()
        if name == "signature-rule":
            return signature_rule_tasks(config.get_int("CATALOG_MAX_P"), config.get_int("TORUS_MAX_K"),
                                        config.get_int("DTWIST_MAX_MN"))
        raise UnknownTableError(f"unknown table '{name}'; choose from {', '.join(TABLES)}")

    def run(self, name: str) -> TableResult:
        tasks = self.tasks_for(name)
        results: List[Optional[TableRow]] = [None] * len(tasks)
        pending: "queue.Queue[Tuple[int, RowTask]]" = queue.Queue()
        for index, task in enumerate(tasks):
            pending.put((index, task))

        def worker():
            while True:
                try:
                    index, task = pending.get_nowait()
                except queue.Empty:
                    return
                row = self._evaluate(task)
                with self._lock:
                    results[index] = row

        threads = [threading.Thread(target=worker, name=f"reproduce-{name}-{n}", daemon=True)
                   for n in range(min(self.workers, len(tasks)) or 1)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()

        result = TableResult(name, [row for row in results if row is not None])
        failed = [row.key for row in result.rows if not row.ok]
        if failed:
            logger.error(f"Table {name}: {len(failed)} of {len(tasks)} rows disagree: {', '.join(failed)}")
        else:
            logger.info(f"Table {name}: all {len(tasks)} rows reproduced")
        return result

    def _evaluate(self, task: RowTask) -> TableRow:
        try:
            cells, records = task.compute()
            return TableRow(task.key, cells, task.expected, records)
        except Exception as e:
            logger.error(f"Error computing row {task.key}: {type(e).__name__}: {e}", exc_info=True)
            return TableRow(task.key, {}, task.expected, error=f"{type(e).__name__}: {e}")
