"""Write-optimized log-structured index (CLSM).

Incoming entries buffer in memory; when the buffer reaches its byte capacity
it is sorted and flushed as a new level-0 run (a sequential write).  Once a
level accumulates more than `growth_factor` runs, its oldest `growth_factor`
runs merge into a single run one level up, so level-i runs never exceed
buffer_bytes * T^i and at most T runs rest per level.

With in-order timestamps this tiering is exactly bounded temporal
partitioning: merges always combine time-adjacent runs, so run timestamp
ranges stay pairwise disjoint, newest data sits in the smallest runs, and the
oldest data gradually migrates into the largest one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import IndexConfig
from .errors import EmptyIndex, EmptyWindowResult, OutOfOrderTimestamp
from .instrument import (
    LOWER_BOUND_ONLY,
    OPENED_PARTITION,
    SKIPPED_PARTITION,
    NullRecorder,
    Recorder,
)
from .search import Best, QueryContext, SearchResult, evaluate_entries, prepare_entry
from .series import DataSeries
from .storage import (
    IndexEntry,
    RawSeriesFile,
    RunWriter,
    SortedRun,
    entries_to_array,
    merge_runs,
    open_run,
    sort_entry_array,
)

MANIFEST_FILE = "MANIFEST.txt"
RAW_FILE = "raw.bin"
CONFIG_FILE = "config.json"
LSM_META_FILE = "lsm.json"


@dataclass(frozen=True)
class FlushEvent:
    """Outcome of persisting the buffer: the sealed run, if any."""

    run: SortedRun | None
    sequence: int
    min_ts: int
    max_ts: int
    entry_count: int


@dataclass
class LevelRun:
    """A live run plus its placement metadata."""

    run: SortedRun
    level: int
    sequence: int


class CLSM:
    """Log-structured index: in-memory buffer plus size-tiered sorted runs."""

    def __init__(self, data_dir: Path, config: IndexConfig,
                 buffer_bytes: int = 4 * 1024 * 1024, growth_factor: int = 3,
                 recorder: Recorder | None = None, create: bool = False,
                 ordered_timestamps: bool = False):
        if growth_factor < 2:
            raise ValueError("growth factor must be at least 2")
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.config = config
        self.buffer_bytes = buffer_bytes
        self.buffer_entries = max(1, buffer_bytes // config.entry_size)
        self.growth_factor = growth_factor
        self.ordered_timestamps = ordered_timestamps
        self.recorder = recorder or NullRecorder()
        raw_path = self.data_dir / RAW_FILE
        if create and not raw_path.exists():
            raw_path.touch()
        self.raw = RawSeriesFile(raw_path, config.n, self.recorder)
        self.levels: list[list[LevelRun]] = []
        self.buffer: list[IndexEntry] = []
        self._buffer_values: list[np.ndarray] = []
        self._buffer_matrix: np.ndarray | None = None
        self._readers: dict[str, object] = {}  # run name -> open RunReader
        self._sequence = 0
        self._last_ts: int | None = None
        if create:
            self._write_manifest()

    # -- bookkeeping -----------------------------------------------------------

    @property
    def entry_count(self) -> int:
        return len(self.buffer) + sum(lr.run.entry_count for lr in self.run_list())

    def run_list(self) -> list[LevelRun]:
        """All live runs, newest first (level 0 head, oldest level tail)."""
        out: list[LevelRun] = []
        for level in self.levels:
            out.extend(sorted(level, key=lambda lr: -lr.sequence))
        return out

    def runs_by_age(self) -> list[LevelRun]:
        """All live runs ordered oldest data first."""
        return list(reversed(self.run_list()))

    @property
    def run_count(self) -> int:
        return sum(len(level) for level in self.levels)

    def _write_manifest(self) -> None:
        lines = ["# level sequence entries min_ts max_ts file"]
        for level_no, level in enumerate(self.levels):
            for lr in level:
                lines.append(
                    f"{level_no} {lr.sequence} {lr.run.entry_count} "
                    f"{lr.run.min_ts} {lr.run.max_ts} {Path(lr.run.path).name}"
                )
        (self.data_dir / MANIFEST_FILE).write_text("\n".join(lines) + "\n")
        self.config.save(self.data_dir / CONFIG_FILE)
        (self.data_dir / LSM_META_FILE).write_text(json.dumps({
            "buffer_bytes": self.buffer_bytes,
            "growth_factor": self.growth_factor,
            "ordered_timestamps": self.ordered_timestamps,
        }))

    @classmethod
    def open(cls, data_dir: Path, recorder: Recorder | None = None) -> "CLSM":
        data_dir = Path(data_dir)
        config = IndexConfig.load(data_dir / CONFIG_FILE)
        meta = json.loads((data_dir / LSM_META_FILE).read_text())
        lsm = cls(data_dir, config, meta["buffer_bytes"], meta["growth_factor"],
                  recorder, ordered_timestamps=meta["ordered_timestamps"])
        for line in (data_dir / MANIFEST_FILE).read_text().splitlines():
            if not line or line.startswith("#"):
                continue
            level_no, seq, _count, _mints, _maxts, name = line.split()
            run = open_run(data_dir / name, lsm.recorder)
            while len(lsm.levels) <= int(level_no):
                lsm.levels.append([])
            lsm.levels[int(level_no)].append(
                LevelRun(run=run, level=int(level_no), sequence=int(seq))
            )
            lsm._sequence = max(lsm._sequence, int(seq) + 1)
        for level in lsm.levels:
            level.sort(key=lambda lr: lr.sequence)
        return lsm

    def _reader(self, run: SortedRun):
        reader = self._readers.get(run.name)
        if reader is None:
            reader = run.open(self.recorder)
            self._readers[run.name] = reader
        return reader

    def _drop_reader(self, run: SortedRun) -> None:
        reader = self._readers.pop(run.name, None)
        if reader is not None:
            reader.close()

    def close(self) -> None:
        for reader in self._readers.values():
            reader.close()
        self._readers.clear()
        self.raw.close()

    @property
    def size_bytes(self) -> int:
        return sum(lr.run.size_bytes for lr in self.run_list())

    # -- writes ------------------------------------------------------------------

    def insert(self, entry: IndexEntry, values: np.ndarray | None = None) -> None:
        """Buffer one entry, flushing and compacting when the buffer is full.

        `values` keeps the series queryable from memory before it reaches a
        run; required for non-materialized configs when queries must not touch
        storage for buffered data.
        """
        if self.ordered_timestamps and self._last_ts is not None \
                and entry.timestamp < self._last_ts:
            raise OutOfOrderTimestamp(
                f"timestamp {entry.timestamp} after {self._last_ts}"
            )
        self._last_ts = max(self._last_ts or 0, entry.timestamp)
        if len(self.buffer) >= self.buffer_entries:
            self.flush()
        self.buffer.append(entry)
        if values is None and entry.payload is not None:
            values = entry.payload
        self._buffer_values.append(values)
        self._buffer_matrix = None

    def insert_series(self, series: DataSeries) -> IndexEntry:
        entry, values = prepare_entry(series, self.config, self.raw)
        self.insert(entry, values)
        return entry

    def flush(self) -> FlushEvent:
        """Sort and persist the buffer as a new level-0 run, then compact."""
        if not self.buffer:
            return FlushEvent(run=None, sequence=self._sequence, min_ts=0,
                              max_ts=0, entry_count=0)
        arr = sort_entry_array(entries_to_array(self.buffer, self.config))
        seq = self._sequence
        self._sequence += 1
        path = self.data_dir / f"run-{seq:08d}.run"
        writer = RunWriter(path, self.config, self.recorder)
        writer.append_array(arr)
        run = writer.finalize()
        if not self.levels:
            self.levels.append([])
        self.levels[0].append(LevelRun(run=run, level=0, sequence=seq))
        event = FlushEvent(run=run, sequence=seq, min_ts=run.min_ts,
                           max_ts=run.max_ts, entry_count=run.entry_count)
        self.buffer = []
        self._buffer_values = []
        self._buffer_matrix = None
        self._compact()
        self._write_manifest()
        return event

    def _compact(self) -> None:
        """Tiering: when a level exceeds T runs, its T oldest merge one level up."""
        level_no = 0
        while level_no < len(self.levels):
            level = self.levels[level_no]
            if len(level) > self.growth_factor:
                level.sort(key=lambda lr: lr.sequence)
                victims = level[: self.growth_factor]
                self.levels[level_no] = level[self.growth_factor:]
                seq = self._sequence
                self._sequence += 1
                path = self.data_dir / f"run-{seq:08d}.run"
                merged = merge_runs([v.run for v in victims], path, self.recorder)
                for v in victims:
                    self._drop_reader(v.run)
                    Path(v.run.path).unlink(missing_ok=True)
                while len(self.levels) <= level_no + 1:
                    self.levels.append([])
                self.levels[level_no + 1].append(
                    LevelRun(run=merged, level=level_no + 1, sequence=seq)
                )
            level_no += 1

    def force_flush(self) -> FlushEvent:
        """Persist the buffer regardless of fill; no-op event when empty."""
        event = self.flush()
        return event

    def force_full_merge(self) -> None:
        """Collapse every on-disk run into one; the buffer is untouched."""
        runs = [lr.run for lr in self.runs_by_age()]
        if len(runs) <= 1:
            return
        seq = self._sequence
        self._sequence += 1
        path = self.data_dir / f"run-{seq:08d}.run"
        merged = merge_runs(runs, path, self.recorder)
        for r in runs:
            self._drop_reader(r)
            Path(r.path).unlink(missing_ok=True)
        top = max(len(self.levels) - 1, 0)
        self.levels = [[] for _ in range(top)] + [
            [LevelRun(run=merged, level=top, sequence=seq)]
        ]
        self._write_manifest()

    # -- queries -------------------------------------------------------------------

    def _snapshot(self):
        """Consistent view for one query: frozen buffer plus the run list."""
        buffer = list(self.buffer)
        values = list(self._buffer_values)
        if self._buffer_matrix is None and buffer:
            mat = np.stack([
                v if v is not None else self.raw.read_values(e.raw_offset)
                for e, v in zip(buffer, values)
            ])
            self._buffer_matrix = mat
        return buffer, self._buffer_matrix, self.run_list()

    def _search_buffer(self, ctx: QueryContext, best: Best, buffer, matrix,
                       window) -> None:
        if not buffer:
            return
        sids = np.fromiter((e.series_id for e in buffer), dtype=np.int64,
                           count=len(buffer))
        tss = np.fromiter((e.timestamp for e in buffer), dtype=np.int64,
                          count=len(buffer))
        if window is not None:
            if tss.max() < window[0] or tss.min() > window[1]:
                return
            mask = (tss >= window[0]) & (tss <= window[1])
            if not mask.any():
                return
            matrix, sids, tss = matrix[mask], sids[mask], tss[mask]
        dists = np.sqrt(((matrix - ctx.values) ** 2).sum(axis=1))
        i = int(np.lexsort((sids, dists))[0])
        best.consider(float(dists[i]), int(sids[i]), int(tss[i]), matrix[i])

    def approximate_search(self, query: DataSeries,
                           window: tuple[int, int] | None = None) -> SearchResult:
        """Probe the buffer plus one key-located page per run, newest first."""
        return self._search(query, window, exact=False, skip_disjoint=False)

    def exact_search(self, query: DataSeries,
                     window: tuple[int, int] | None = None) -> SearchResult:
        """Probe-seeded pruned sequential scan over the buffer and every run."""
        return self._search(query, window, exact=True, skip_disjoint=False)

    def _search(self, query: DataSeries, window: tuple[int, int] | None, *,
                exact: bool, skip_disjoint: bool) -> SearchResult:
        """One query against a snapshot; `skip_disjoint` is the TP/BTP behavior
        of never opening runs whose timestamp range misses the window."""
        trace = self.recorder.start_trace()
        ctx = QueryContext(query, self.config)
        best = Best()
        buffer, matrix, runs = self._snapshot()
        if not buffer and not runs:
            self.recorder.finish_trace(trace)
            raise EmptyIndex("index holds no entries")
        if skip_disjoint and window is not None:
            live = []
            for lr in runs:
                if lr.run.max_ts < window[0] or lr.run.min_ts > window[1]:
                    self.recorder.trace_event(lr.run.name, 0, SKIPPED_PARTITION)
                else:
                    live.append(lr)
            runs = live
        self._search_buffer(ctx, best, buffer, matrix, window)
        for lr in runs:
            self._probe_run(lr, ctx, best, window)
        if exact:
            for lr in runs:
                self._scan_run(lr, ctx, best, window)
        self.recorder.finish_trace(trace)
        self._check_found(best, window)
        return best.result(exact=exact, trace_id=trace.query_id)

    def _probe_run(self, lr: LevelRun, ctx: QueryContext, best: Best,
                   window) -> None:
        # lower-bound pruning inside the probed page never changes the best
        # candidate found (an entry beating the best must bound below it), it
        # only avoids pointless raw fetches
        run = lr.run
        reader = self._reader(run)
        page = reader.locate_page(ctx.key_word)
        arr = reader.read_page(page)
        self.recorder.trace_event(run.name, page, OPENED_PARTITION)
        evaluate_entries(arr, ctx, best, self.recorder, self.raw,
                         window=window, prune=True)

    def _scan_run(self, lr: LevelRun, ctx: QueryContext, best: Best,
                  window) -> None:
        run = lr.run
        reader = self._reader(run)
        per_page = reader.entries_per_page
        symbols = reader.cached_symbols()
        # read several pages per I/O, but keep trace granularity at pages
        chunk = max(per_page, ((4 << 20) // reader.entry_size) // max(1, per_page)
                    * per_page)
        for start in range(0, reader.entry_count, chunk):
            arr = reader.read_slice(start, chunk)
            pages = range(start // per_page,
                          (start + len(arr) - 1) // per_page + 1)
            self.recorder.trace_pages(run.name, pages, OPENED_PARTITION)
            fetches = evaluate_entries(arr, ctx, best, self.recorder, self.raw,
                                       window=window, prune=True,
                                       symbols=symbols[start:start + len(arr)])
            if fetches == 0:
                self.recorder.trace_pages(run.name, pages, LOWER_BOUND_ONLY)

    @staticmethod
    def _check_found(best: Best, window) -> None:
        if not best.found:
            raise EmptyWindowResult(f"no entry inside window {window}")

    # -- integrity ---------------------------------------------------------------

    def verify_runs_sorted(self) -> bool:
        for lr in self.run_list():
            reader = lr.run.open(self.recorder)
            ok = reader.verify_sorted()
            reader.close()
            if not ok:
                return False
        return True

    def series_id_multiset(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for e in self.buffer:
            counts[e.series_id] = counts.get(e.series_id, 0) + 1
        for lr in self.run_list():
            reader = lr.run.open(self.recorder)
            for chunk in reader.iter_chunks(chunk_entries=65536):
                for sid in chunk["sid"]:
                    counts[int(sid)] = counts.get(int(sid), 0) + 1
            reader.close()
        return counts

    def max_run_count_bound(self, inserted: int) -> int:
        """T * ceil(log_T(inserted / buffer_entries)) + 1, at least 1."""
        ratio = max(1.0, inserted / self.buffer_entries)
        return self.growth_factor * math.ceil(
            math.log(ratio) / math.log(self.growth_factor)
        ) + 1
