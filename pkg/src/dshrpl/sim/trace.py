"""Ordered event log with a running 64-bit digest."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterator, List, Optional


@dataclass(frozen=True)
class TraceRecord:
    time: int          # microseconds
    kind: str
    actor: int
    detail: str

    def line(self) -> str:
        return f"{self.time}\t{self.kind}\t{self.actor}\t{self.detail}"


class EventTrace:
    """Append-only trace; timestamps must never go backwards.

    The digest covers every record whether or not records are kept in memory.
    """

    def __init__(self, keep_records: bool = True):
        self.keep_records = keep_records
        self._records: List[TraceRecord] = []
        self._hash = hashlib.blake2b(digest_size=8)
        self._last = 0
        self.count = 0

    def log(self, time: int, kind: str, actor: int, detail: str = "") -> None:
        if time < self._last:
            raise ValueError(f"trace time went backwards: {time} < {self._last}")
        self._last = time
        rec = TraceRecord(time, kind, actor, detail)
        self._hash.update((rec.line() + "\n").encode())
        self.count += 1
        if self.keep_records:
            self._records.append(rec)

    @property
    def digest(self) -> int:
        return int.from_bytes(self._hash.digest(), "big")

    @property
    def hexdigest(self) -> str:
        return self._hash.hexdigest()

    @property
    def records(self) -> List[TraceRecord]:
        return list(self._records)

    def select(self, kind: Optional[str] = None, actor: Optional[int] = None) -> Iterator[TraceRecord]:
        for r in self._records:
            if (kind is None or r.kind == kind) and (actor is None or r.actor == actor):
                yield r

    def lines(self) -> Iterator[str]:
        for r in self._records:
            yield r.line()

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("time\tkind\tactor\tdetail\n")
            for line in self.lines():
                fh.write(line + "\n")
