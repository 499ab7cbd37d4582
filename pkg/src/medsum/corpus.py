"""Dataset ingestion: parse the JSON corpus, split it by task, bucket by length.

The corpus file is either a JSON array of records or newline-delimited JSON,
each record carrying ``id``, ``inputs`` and ``target`` (case-insensitive).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable, Union


class CorpusError(Exception):
    """Malformed dataset input."""


class ParseError(CorpusError):
    """The byte stream is not valid JSON at all."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class RecordError(CorpusError):
    """One record is structurally invalid; carries its index in the stream."""

    def __init__(self, message: str, index: int):
        super().__init__(f"record {index}: {message}")
        self.index = index


@dataclass(frozen=True)
class DatasetEntry:
    id: str
    inputs: str
    target: str


class TaskKind(str, Enum):
    PASSAGE = "passage"
    CONVERSATION = "conversation"
    QUESTION = "question"


class LengthBucket(int, Enum):
    SHORT = 0
    MEDIUM = 1
    LONG = 2

    @property
    def label(self) -> str:
        return {0: "short", 1: "medium", 2: "long"}[self.value]


@dataclass(frozen=True)
class BucketConfig:
    """Word-count thresholds separating short/medium/long inputs for one task."""

    task: TaskKind
    short_max: int
    medium_max: int

    def __post_init__(self):
        if not (0 < self.short_max < self.medium_max):
            raise ValueError(
                f"need 0 < short_max < medium_max, got {self.short_max}, {self.medium_max}"
            )


# Thresholds sit in the gaps between the observed per-task word-count ranges,
# so every observed sample lands in its stated bucket and the mapping is total.
DEFAULT_BUCKETS = {
    TaskKind.PASSAGE: BucketConfig(TaskKind.PASSAGE, short_max=39, medium_max=92),
    TaskKind.QUESTION: BucketConfig(TaskKind.QUESTION, short_max=32, medium_max=93),
    TaskKind.CONVERSATION: BucketConfig(
        TaskKind.CONVERSATION, short_max=1001, medium_max=2182
    ),
}

_REQUIRED_FIELDS = ("id", "inputs", "target")


def _normalize_record(obj, index: int) -> DatasetEntry:
    if not isinstance(obj, dict):
        raise RecordError(f"expected an object, got {type(obj).__name__}", index)
    lowered = {str(k).lower(): v for k, v in obj.items()}
    values = {}
    for field in _REQUIRED_FIELDS:
        if field not in lowered:
            raise RecordError(f"missing required field '{field}'", index)
        values[field] = str(lowered[field]).strip()
    if not values["id"]:
        raise RecordError("empty id", index)
    if not values["inputs"]:
        raise RecordError("empty inputs", index)
    return DatasetEntry(id=values["id"], inputs=values["inputs"], target=values["target"])


def parse_dataset(
    raw: Union[bytes, str, IO[bytes]], strict: bool = False
) -> tuple[list[DatasetEntry], int]:
    """Parse a JSON array or JSON-lines corpus into entries.

    Returns (entries, skipped_count). In strict mode a bad record raises
    RecordError instead of being counted and skipped. Duplicate ids are a
    record-level error on the later occurrence.
    """
    if hasattr(raw, "read"):
        raw = raw.read()
    if isinstance(raw, bytes):
        text = raw.decode("utf-8")
    else:
        text = raw

    records = _load_records(text)

    entries: list[DatasetEntry] = []
    seen: set[str] = set()
    skipped = 0
    for index, obj in enumerate(records):
        try:
            entry = _normalize_record(obj, index)
            if entry.id in seen:
                raise RecordError(f"duplicate id '{entry.id}'", index)
        except RecordError:
            if strict:
                raise
            skipped += 1
            continue
        seen.add(entry.id)
        entries.append(entry)
    return entries, skipped


def _load_records(text: str) -> list:
    stripped = text.strip()
    if not stripped:
        return []
    if stripped.startswith("["):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.pos) from exc
        if not isinstance(data, list):
            raise ParseError("top-level JSON value is not an array", 0)
        return data
    # JSON-lines fallback
    records = []
    offset = 0
    for line in text.splitlines(keepends=True):
        if line.strip():
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ParseError(exc.msg, offset + exc.pos) from exc
        offset += len(line)
    return records


_SPEAKER_TURN = re.compile(r"^\s*(doctor|patient|d|p)\s*:", re.IGNORECASE)
_INTERROGATIVES = ("what", "why", "how", "when", "is", "can", "does", "should")


def classify_task(entry: DatasetEntry) -> TaskKind:
    """Route an entry to its task corpus.

    Two or more speaker-turn lines make it a conversation; a question-shaped
    target makes it a question; everything else is a passage.
    """
    turns = sum(1 for line in entry.inputs.splitlines() if _SPEAKER_TURN.match(line))
    if turns >= 2:
        return TaskKind.CONVERSATION
    target = entry.target.strip()
    if target.endswith("?"):
        return TaskKind.QUESTION
    first = target.split(None, 1)[0].lower() if target else ""
    if first in _INTERROGATIVES:
        return TaskKind.QUESTION
    return TaskKind.PASSAGE


def word_count(text: str) -> int:
    """Number of maximal non-whitespace runs."""
    return len(text.split())


def assign_bucket(count: int, config: BucketConfig) -> LengthBucket:
    if count <= config.short_max:
        return LengthBucket.SHORT
    if count <= config.medium_max:
        return LengthBucket.MEDIUM
    return LengthBucket.LONG


def split_by_task(entries: Iterable[DatasetEntry]) -> dict[TaskKind, list[DatasetEntry]]:
    out: dict[TaskKind, list[DatasetEntry]] = {task: [] for task in TaskKind}
    for entry in entries:
        out[classify_task(entry)].append(entry)
    return out


def entry_to_json(entry: DatasetEntry) -> str:
    return json.dumps(
        {"id": entry.id, "inputs": entry.inputs, "target": entry.target},
        ensure_ascii=False,
    )


def write_jsonl(entries: Iterable[DatasetEntry], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(entry_to_json(entry) + "\n")
