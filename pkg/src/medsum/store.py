"""Summary persistence: one table, four columns, sqlite-backed.

The table DDL lives in schema.sql. Timestamps are UTC with microsecond
precision and are forced non-decreasing within one process so listing order
matches insertion order even under clock jitter.
"""

from __future__ import annotations

import sqlite3
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources

DEFAULT_DB_PATH = "./medsum.db"
ENV_DB_URL = "MEDSUM_DB_URL"


class StorageError(Exception):
    """The underlying database rejected or lost the operation."""


class NotFound(Exception):
    """No record with the requested id."""


class ValidationError(Exception):
    """Malformed input, e.g. a string that is not a UUID."""


@dataclass(frozen=True)
class SummaryRecord:
    id: str
    input: str
    summarized: str
    created_time: datetime


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class SummaryStore:
    """Thread-safe store over a single sqlite connection."""

    def __init__(self, path: str = DEFAULT_DB_PATH):
        self.path = path
        self._lock = threading.Lock()
        try:
            self._conn = sqlite3.connect(path, check_same_thread=False)
            ddl = (resources.files("medsum") / "schema.sql").read_text(encoding="utf-8")
            with self._lock:
                self._conn.executescript(ddl)
                self._conn.commit()
        except sqlite3.Error as exc:
            raise StorageError(f"cannot open store at {path}: {exc}") from exc
        self._last_time = datetime.min.replace(tzinfo=timezone.utc)

    def close(self) -> None:
        self._conn.close()

    def insert_summary(self, input_text: str, summarized: str) -> SummaryRecord:
        if not input_text or not summarized:
            raise ValidationError("input and summarized must be non-empty")
        with self._lock:
            created = _utcnow()
            if created < self._last_time:
                created = self._last_time
            self._last_time = created
            record = SummaryRecord(
                id=str(uuid.uuid4()),
                input=input_text,
                summarized=summarized,
                created_time=created,
            )
            try:
                self._conn.execute(
                    "INSERT INTO summaries (id, input, summarized, created_time) VALUES (?, ?, ?, ?)",
                    (record.id, record.input, record.summarized, created.isoformat()),
                )
                self._conn.commit()
            except sqlite3.Error as exc:
                raise StorageError(f"insert failed: {exc}") from exc
        return record

    def list_summaries(self, limit: int = 20, offset: int = 0) -> list[SummaryRecord]:
        if limit < 1 or offset < 0:
            raise ValidationError("limit must be >= 1 and offset >= 0")
        with self._lock:
            try:
                rows = self._conn.execute(
                    "SELECT id, input, summarized, created_time FROM summaries "
                    "ORDER BY created_time DESC, id LIMIT ? OFFSET ?",
                    (limit, offset),
                ).fetchall()
            except sqlite3.Error as exc:
                raise StorageError(f"list failed: {exc}") from exc
        return [self._row_to_record(row) for row in rows]

    def count(self) -> int:
        with self._lock:
            try:
                (n,) = self._conn.execute("SELECT COUNT(*) FROM summaries").fetchone()
            except sqlite3.Error as exc:
                raise StorageError(f"count failed: {exc}") from exc
        return n

    def get_summary(self, record_id: str) -> SummaryRecord:
        try:
            uuid.UUID(record_id)
        except (ValueError, AttributeError, TypeError) as exc:
            raise ValidationError(f"not a UUID: {record_id!r}") from exc
        with self._lock:
            try:
                row = self._conn.execute(
                    "SELECT id, input, summarized, created_time FROM summaries WHERE id = ?",
                    (record_id,),
                ).fetchone()
            except sqlite3.Error as exc:
                raise StorageError(f"get failed: {exc}") from exc
        if row is None:
            raise NotFound(record_id)
        return self._row_to_record(row)

    @staticmethod
    def _row_to_record(row) -> SummaryRecord:
        return SummaryRecord(
            id=row[0],
            input=row[1],
            summarized=row[2],
            created_time=datetime.fromisoformat(row[3]),
        )
