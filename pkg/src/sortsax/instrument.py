"""I/O accounting and per-query access traces.

Counters classify every storage read/write as sequential or random: an access
is sequential iff its offset equals the end of the previous access of the same
kind on the same file.  Traces record which pages a query touched and why, at
storage page granularity, and feed the heat map and the locality assertions.

A `NullRecorder` stands in when instrumentation is disabled so the hot paths
pay nothing beyond a no-op method call.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field

from .errors import UnknownQueryId

# Trace event kinds.
LOWER_BOUND_ONLY = "lower_bound_only"
RAW_FETCH = "raw_fetch"
SKIPPED_PARTITION = "skipped_partition"
OPENED_PARTITION = "opened_partition"

EVENT_KINDS = (LOWER_BOUND_ONLY, RAW_FETCH, SKIPPED_PARTITION, OPENED_PARTITION)


@dataclass
class IOCounters:
    """Byte counters split by direction and access pattern, plus dataset passes."""

    seq_read_bytes: int = 0
    rand_read_bytes: int = 0
    seq_write_bytes: int = 0
    rand_write_bytes: int = 0
    read_passes: int = 0

    @property
    def total_read_bytes(self) -> int:
        return self.seq_read_bytes + self.rand_read_bytes

    @property
    def total_write_bytes(self) -> int:
        return self.seq_write_bytes + self.rand_write_bytes

    def as_dict(self) -> dict:
        return {
            "seq_read_bytes": self.seq_read_bytes,
            "rand_read_bytes": self.rand_read_bytes,
            "seq_write_bytes": self.seq_write_bytes,
            "rand_write_bytes": self.rand_write_bytes,
            "read_passes": self.read_passes,
        }


@dataclass(frozen=True)
class TraceEvent:
    file: str
    page: int
    kind: str


@dataclass
class AccessTrace:
    """Ordered page-level events of one traced query."""

    query_id: str
    events: list[TraceEvent] = field(default_factory=list)

    def add(self, file: str, page: int, kind: str) -> None:
        self.events.append(TraceEvent(file=file, page=page, kind=kind))

    def pages_touched(self, file: str, kinds: tuple[str, ...] = (OPENED_PARTITION,)) -> set[int]:
        return {e.page for e in self.events if e.file == file and e.kind in kinds}

    def files(self) -> set[str]:
        return {e.file for e in self.events}

    def to_lines(self) -> str:
        """Line-delimited export: one JSON object per event."""
        out = []
        for e in self.events:
            out.append(json.dumps({"file": e.file, "page": e.page, "kind": e.kind}))
        return "\n".join(out) + ("\n" if out else "")

    @classmethod
    def from_lines(cls, query_id: str, text: str) -> "AccessTrace":
        trace = cls(query_id=query_id)
        for line in text.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            trace.add(rec["file"], rec["page"], rec["kind"])
        return trace


class Recorder:
    """Per-engine instrumentation: counters plus a registry of query traces.

    Completed traces are retained newest-first up to `max_traces`; older ones
    are evicted so long-running query streams stay bounded in memory.
    """

    enabled = True

    def __init__(self, max_traces: int = 512) -> None:
        self.counters = IOCounters()
        self.max_traces = max_traces
        self._read_ends: dict[str, int] = {}
        self._write_ends: dict[str, int] = {}
        self._traces: dict[str, AccessTrace] = {}
        self._active: list[AccessTrace] = []
        self._lock = threading.Lock()
        self._next_query = 0

    # -- counters ------------------------------------------------------------

    def record_read(self, file: str, offset: int, size: int) -> None:
        with self._lock:
            if offset == self._read_ends.get(file, 0):
                self.counters.seq_read_bytes += size
            else:
                self.counters.rand_read_bytes += size
            self._read_ends[file] = offset + size

    def record_write(self, file: str, offset: int, size: int) -> None:
        with self._lock:
            if offset == self._write_ends.get(file, 0):
                self.counters.seq_write_bytes += size
            else:
                self.counters.rand_write_bytes += size
            self._write_ends[file] = offset + size

    def note_read_pass(self) -> None:
        with self._lock:
            self.counters.read_passes += 1

    def snapshot(self) -> IOCounters:
        with self._lock:
            return IOCounters(**self.counters.as_dict())

    def reset(self) -> None:
        with self._lock:
            self.counters = IOCounters()
            self._read_ends.clear()
            self._write_ends.clear()

    # -- traces ----------------------------------------------------------------

    def start_trace(self, query_id: str | None = None) -> AccessTrace:
        with self._lock:
            if query_id is None:
                query_id = f"q{self._next_query:06d}"
                self._next_query += 1
            trace = AccessTrace(query_id=query_id)
            self._traces[query_id] = trace
            while len(self._traces) > self.max_traces:
                oldest = next(iter(self._traces))
                del self._traces[oldest]
            self._active.append(trace)
            return trace

    def finish_trace(self, trace: AccessTrace) -> AccessTrace:
        with self._lock:
            if trace in self._active:
                self._active.remove(trace)
            return trace

    def trace_event(self, file: str, page: int, kind: str) -> None:
        """Record an event on every trace currently open."""
        with self._lock:
            for trace in self._active:
                trace.add(file, page, kind)

    def trace_pages(self, file: str, pages, kind: str) -> None:
        """Record one event per page, in order, under a single lock hold."""
        with self._lock:
            for trace in self._active:
                for page in pages:
                    trace.add(file, page, kind)

    def trace(self, query_id: str) -> AccessTrace:
        with self._lock:
            try:
                return self._traces[query_id]
            except KeyError:
                raise UnknownQueryId(query_id) from None


class NullRecorder(Recorder):
    """Disabled instrumentation: every hook is a no-op, traces are transient."""

    enabled = False

    def record_read(self, file: str, offset: int, size: int) -> None:
        pass

    def record_write(self, file: str, offset: int, size: int) -> None:
        pass

    def note_read_pass(self) -> None:
        pass

    def trace_event(self, file: str, page: int, kind: str) -> None:
        pass

    def trace_pages(self, file: str, pages, kind: str) -> None:
        pass

    def start_trace(self, query_id: str | None = None) -> AccessTrace:
        return AccessTrace(query_id=query_id or "disabled")

    def finish_trace(self, trace: AccessTrace) -> AccessTrace:
        return trace

    def trace(self, query_id: str) -> AccessTrace:
        raise UnknownQueryId(query_id)
