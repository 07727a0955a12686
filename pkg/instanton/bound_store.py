import threading
from datetime import datetime
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional

from instanton.invariants import INFINITY, format_value


class BoundKind(Enum):
    CLASP_PLUS = "clasp_plus"
    UNKNOTTING = "unknotting"
    CROSSCAP = "crosscap"
    GAMMA_SHIFT = "gamma_shift"
    H_SHIFT = "h_shift"
    SLICE_OBSTRUCTION = "slice_obstruction"


def _parse_value(text: str):
    if text == "inf":
        return INFINITY
    return Fraction(text)


class BoundRecord:
    """A certified inequality together with the values it was derived from.

    inputs is a list of {"invariant", "knot", "value"} dicts; values are
    rendered with format_value so records serialise exactly.
    """

    def __init__(self, kind: BoundKind, knot: str, statement: str, value,
                 inputs: Optional[List[Dict[str, str]]] = None, certificate: bool = False,
                 notes: Optional[Dict[str, Any]] = None):
        self.kind = kind
        self.knot = knot
        self.statement = statement
        self.value = value
        self.inputs = list(inputs or [])
        self.certificate = certificate
        self.notes: Dict[str, Any] = dict(notes or {})
        self.created_at = datetime.now()

    def add_input(self, invariant: str, knot: str, value):
        self.inputs.append({'invariant': invariant, 'knot': knot, 'value': format_value(value)})

    def to_dict(self) -> dict:
        data = {
            'kind': self.kind.value,
            'knot': self.knot,
            'statement': self.statement,
            'value': format_value(self.value),
            'inputs': [dict(entry) for entry in self.inputs],
            'certificate': self.certificate,
        }
        if self.notes:
            data['notes'] = dict(self.notes)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'BoundRecord':
        return cls(
            kind=BoundKind(data['kind']),
            knot=data.get('knot', ''),
            statement=data['statement'],
            value=_parse_value(str(data['value'])),
            inputs=data.get('inputs', []),
            certificate=bool(data.get('certificate', False)),
            notes=data.get('notes'),
        )

    def __repr__(self) -> str:
        return f"BoundRecord({self.kind.value}, {self.statement!r})"


class BoundStore:
    def __init__(self):
        self._records: List[BoundRecord] = []
        self._lock = threading.RLock()

    def add(self, record: BoundRecord) -> BoundRecord:
        with self._lock:
            self._records.append(record)
            return record

    def extend(self, records) -> int:
        with self._lock:
            before = len(self._records)
            self._records.extend(records)
            return len(self._records) - before

    def get_all(self) -> List[BoundRecord]:
        with self._lock:
            return list(self._records)

    def by_kind(self, kind: BoundKind) -> List[BoundRecord]:
        with self._lock:
            return [record for record in self._records if record.kind == kind]

    def by_knot(self, knot: str) -> List[BoundRecord]:
        with self._lock:
            return [record for record in self._records if record.knot == knot]

    def certificates(self) -> List[BoundRecord]:
        """Records where a lower bound met a supplied upper bound."""
        with self._lock:
            return [record for record in self._records if record.certificate]

    def clear(self):
        with self._lock:
            self._records.clear()
