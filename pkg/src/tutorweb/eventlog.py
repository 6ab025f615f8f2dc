"""Append-only answer log: the durable record every engine state derives from.

One flat record per line.  Appends are flushed and fsynced before the caller
regains control, so anything a client was told has hit disk.  Reading is
tolerant of exactly one torn write: a final line that does not parse is
treated as a crash artifact and dropped, while garbage earlier in the file
is reported as corruption at that sequence number.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .allocation import QuizEngine
from .errors import (
    CorruptLogError,
    OrderingViolationError,
    StorageFailureError,
)

EVENT_ALLOCATED = "allocated"
EVENT_ANSWERED = "answered"


@dataclass(frozen=True)
class LogEntry:
    seq: int
    time: float
    student: str
    lecture: str
    question: str
    event: str
    correct: bool | None = None
    points: float | None = None
    grade_after: float | None = None

    def to_json(self) -> str:
        record = asdict(self)
        if self.event == EVENT_ALLOCATED:
            for key in ("correct", "points", "grade_after"):
                record.pop(key)
        return json.dumps(record, separators=(",", ":"))


def _entry_from_record(record: dict) -> LogEntry:
    return LogEntry(
        seq=int(record["seq"]),
        time=float(record["time"]),
        student=str(record["student"]),
        lecture=str(record["lecture"]),
        question=str(record["question"]),
        event=str(record["event"]),
        correct=record.get("correct"),
        points=record.get("points"),
        grade_after=record.get("grade_after"),
    )


def read_entries(path: str | Path) -> list[LogEntry]:
    """Parse the log, dropping a torn final line but rejecting mid-file damage."""
    path = Path(path)
    if not path.exists():
        return []
    raw_lines = path.read_bytes().split(b"\n")
    entries: list[LogEntry] = []
    last_index = len(raw_lines) - 1
    for i, raw in enumerate(raw_lines):
        if not raw.strip():
            continue
        try:
            record = json.loads(raw.decode("utf-8"))
            entry = _entry_from_record(record)
        except (ValueError, KeyError, UnicodeDecodeError):
            if i == last_index:
                break  # torn tail: append died before the newline landed
            raise CorruptLogError(
                (entries[-1].seq + 1) if entries else 1,
                f"unparseable entry on line {i + 1}",
            )
        entries.append(entry)
    return entries


class EventLog:
    """Writer with sequencing and the allocated-before-answered check."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._last_seq = 0
        self._outstanding: dict[tuple[str, str, str], int] = {}
        for entry in read_entries(self.path):
            self._track(entry, source_seq=entry.seq)

    def next_seq(self) -> int:
        return self._last_seq + 1

    def _track(self, entry: LogEntry, source_seq: int) -> None:
        if entry.seq <= self._last_seq:
            raise OrderingViolationError(
                f"seq {entry.seq} not after {self._last_seq}"
            )
        key = (entry.student, entry.lecture, entry.question)
        if entry.event == EVENT_ALLOCATED:
            self._outstanding[key] = self._outstanding.get(key, 0) + 1
        elif entry.event == EVENT_ANSWERED:
            held = self._outstanding.get(key, 0)
            if held < 1:
                raise OrderingViolationError(
                    f"seq {source_seq}: answer without prior allocation"
                )
            if held > 1:
                self._outstanding[key] = held - 1
            else:
                del self._outstanding[key]
            if entry.correct is None or entry.points is None \
                    or entry.grade_after is None:
                raise OrderingViolationError(
                    f"seq {source_seq}: answered entry missing outcome fields"
                )
        else:
            raise OrderingViolationError(
                f"seq {source_seq}: unknown event {entry.event!r}"
            )
        self._last_seq = entry.seq

    def append(self, entry: LogEntry) -> int:
        self._track(entry, source_seq=entry.seq)
        try:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(entry.to_json() + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise StorageFailureError(f"append failed: {exc}") from exc
        return entry.seq


def replay(
    entries: Iterable[LogEntry],
    engine: QuizEngine,
    skip_unknown: bool = False,
) -> QuizEngine:
    """Drive an engine through logged events, reproducing live state exactly.

    With skip_unknown, entries naming questions absent from the engine's bank
    are ignored (used after a content import removes items); otherwise any
    invariant violation raises CorruptLogError at the offending seq.
    """
    last_seq = 0
    for entry in entries:
        if entry.seq <= last_seq:
            raise CorruptLogError(entry.seq, "sequence numbers not increasing")
        last_seq = entry.seq
        if skip_unknown and entry.question not in engine.bank.questions:
            continue
        if entry.event == EVENT_ALLOCATED:
            try:
                engine.apply_allocated(entry.student, entry.lecture, entry.question)
            except Exception as exc:
                raise CorruptLogError(entry.seq, str(exc)) from exc
        elif entry.event == EVENT_ANSWERED:
            state = engine.state(entry.student, entry.lecture)
            if state.open.get(entry.question, 0) < 1:
                if skip_unknown:
                    continue
                raise CorruptLogError(
                    entry.seq, "answer without prior allocation"
                )
            if entry.correct is None:
                raise CorruptLogError(entry.seq, "answered entry lacks correct")
            expected = 1.0 if entry.correct else -0.5
            if entry.points is not None and entry.points != expected:
                raise CorruptLogError(
                    entry.seq, "points inconsistent with correctness"
                )
            try:
                engine.apply_answered(
                    entry.student, entry.lecture, entry.question, entry.correct
                )
            except Exception as exc:
                raise CorruptLogError(entry.seq, str(exc)) from exc
        else:
            raise CorruptLogError(entry.seq, f"unknown event {entry.event!r}")
    return engine


def iter_grade_trace(
    entries: Iterable[LogEntry], engine: QuizEngine
) -> Iterator[tuple[int, float, int]]:
    """Yield (seq, grade, bucket) after each answered entry during replay."""
    from .allocation import grade, grade_bucket

    last_seq = 0
    for entry in entries:
        if entry.seq <= last_seq:
            raise CorruptLogError(entry.seq, "sequence numbers not increasing")
        last_seq = entry.seq
        if entry.event == EVENT_ALLOCATED:
            engine.apply_allocated(entry.student, entry.lecture, entry.question)
        else:
            engine.apply_answered(
                entry.student, entry.lecture, entry.question, bool(entry.correct)
            )
            state = engine.state(entry.student, entry.lecture)
            yield entry.seq, grade(state), grade_bucket(state)
