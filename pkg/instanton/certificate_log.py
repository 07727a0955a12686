import json
import logging
import threading
from datetime import datetime
from pathlib import Path
from typing import Dict, List

from instanton.bound_store import BoundRecord

logger = logging.getLogger(__name__)


class CertificateLog:
    """Append-only JSON Lines file of bound records, one entry per line."""

    def __init__(self, path: str = 'certificates.jsonl'):
        self.path = Path(path)
        self._lock = threading.Lock()

    def log_certificate(self, record: BoundRecord, source: str = 'bounds', status: str = 'certified'):
        """Append record, tagged with the command or table that produced it.

        status is 'certified', or 'mismatch' for rows a reproduction table
        failed to match.
        """
        entry = {
            'timestamp': datetime.now().isoformat(),
            'source': source,
            'status': status,
            'record': record.to_dict(),
        }
        with self._lock, self.path.open('a', encoding='utf-8') as f:
            f.write(json.dumps(entry, ensure_ascii=False) + "\n")
        logger.info(f"Logged {record.kind.value} bound for {record.knot} ({status}) to {self.path}")

    def entries(self) -> List[Dict]:
        """Logged entries in file order; unreadable lines are skipped."""
        if not self.path.exists():
            return []
        entries = []
        with self._lock, self.path.open('r', encoding='utf-8') as f:
            for number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    entries.append(json.loads(line))
                except json.JSONDecodeError as e:
                    logger.warning(f"Skipping line {number} of {self.path}: {e}")
        return entries

    def get_records(self) -> List[BoundRecord]:
        return [BoundRecord.from_dict(entry['record']) for entry in self.entries() if 'record' in entry]
