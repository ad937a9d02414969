"""Read-optimized bulk-loaded index (CTree).

The leaf level is one sorted sequence of entries packed into fixed-size pages
at a tunable fill factor, laid out contiguously in key order at build time.
Inner levels are flat (separator key, child) arrays built bottom-up and kept
in memory; a small sidecar JSON file persists the leaf directory.

Searches: the approximate variant descends to exactly one leaf and evaluates
its entries; the exact variant seeds its best-so-far from that probe and then
makes a pruned sequential pass over the whole leaf level.
"""

from __future__ import annotations

import json
import math
import struct
from bisect import bisect_right
from pathlib import Path

import numpy as np

from .config import IndexConfig
from .errors import EmptyIndex, EmptyInput, EmptyWindowResult
from .instrument import LOWER_BOUND_ONLY, OPENED_PARTITION, NullRecorder, Recorder
from .search import Best, QueryContext, SearchResult, evaluate_entries, prepare_entry
from .series import DataSeries
from .storage import (
    IndexEntry,
    MemoryBudget,
    RawSeriesFile,
    SortedRun,
    TrackedFile,
    disk_dtype,
    entries_to_array,
    entry_dtype,
    external_sort,
)
from .summarize import MAX_KEY_BITS

PAGE_HEADER = 16  # u32 entry count + 12 reserved bytes
INNER_FANOUT = 64

LEAF_FILE = "leaves.pg"
INNER_FILE = "inner.json"
RAW_FILE = "raw.bin"
CONFIG_FILE = "config.json"


def leaf_capacity(config: IndexConfig) -> int:
    return max(2, (config.page_size - PAGE_HEADER) // config.entry_size)


class PagedLeafFile:
    """Fixed-size page slots holding sorted entry records plus a count header."""

    def __init__(self, path: Path, config: IndexConfig, recorder: Recorder,
                 create: bool = False):
        self.config = config
        self.page_size = config.page_size
        self.dtype = entry_dtype(config)
        self.disk_dtype = disk_dtype(config)
        self.file = TrackedFile(path, recorder, create=create, writable=not create)

    @property
    def page_count(self) -> int:
        return self.file.size() // self.page_size

    def read_page(self, page_id: int) -> np.ndarray:
        data = self.file.read_at(page_id * self.page_size, self.page_size)
        count = struct.unpack_from("<I", data)[0]
        return np.frombuffer(data, dtype=self.disk_dtype, count=count,
                             offset=PAGE_HEADER)

    def write_page(self, page_id: int, arr: np.ndarray) -> None:
        body = arr.astype(self.disk_dtype, copy=False).tobytes()
        page = struct.pack("<I12x", len(arr)) + body
        page += b"\x00" * (self.page_size - len(page))
        self.file.write_at(page_id * self.page_size, page)

    def append_page(self, arr: np.ndarray) -> int:
        page_id = self.page_count
        self.write_page(page_id, arr)
        return page_id

    def flush(self) -> None:
        self.file.flush()

    def close(self) -> None:
        self.file.close()


def _first_key_word(arr: np.ndarray) -> int:
    return (int(arr["key_hi"][0]) << 64) | int(arr["key_lo"][0])


def _insert_position(arr: np.ndarray, entry_word: int, ts: int, sid: int) -> int:
    """Count of rows ordered strictly before (key, ts, sid)."""
    hi, lo = entry_word >> 64, entry_word & 0xFFFFFFFFFFFFFFFF
    khi, klo = arr["key_hi"], arr["key_lo"]
    ats, asid = arr["ts"], arr["sid"]
    eq1 = khi == hi
    eq2 = eq1 & (klo == lo)
    eq3 = eq2 & (ats == ts)
    less = (khi < hi) | (eq1 & (klo < lo)) | (eq2 & (ats < ts)) | (eq3 & (asid < sid))
    return int(less.sum())


class CTree:
    """Bulk-loaded, contiguous, page-packed index over sortable keys."""

    def __init__(self, data_dir: Path, config: IndexConfig, fill_factor: float,
                 recorder: Recorder | None = None, create: bool = False):
        self.data_dir = Path(data_dir)
        self.config = config
        self.fill_factor = fill_factor
        self.recorder = recorder or NullRecorder()
        self.capacity = leaf_capacity(config)
        self.fill_target = max(1, math.ceil(fill_factor * self.capacity))
        self.leaves = PagedLeafFile(self.data_dir / LEAF_FILE, config,
                                    self.recorder, create=create)
        raw_path = self.data_dir / RAW_FILE
        if create and not raw_path.exists():
            raw_path.touch()
        self.raw = RawSeriesFile(raw_path, config.n, self.recorder)
        self.leaf_order: list[int] = []      # page ids in key order
        self.first_words: list[int] = []     # aligned first key per leaf, same order
        self.inner_levels: list[list[int]] = []
        self.entry_count = 0

    # -- construction ---------------------------------------------------------

    @classmethod
    def bulk_load(cls, sorted_run: SortedRun, fill_factor: float, data_dir: Path,
                  recorder: Recorder | None = None) -> "CTree":
        """Pack a sorted run into leaves at the fill factor, sequentially."""
        if sorted_run.entry_count == 0:
            raise EmptyInput("cannot bulk load an empty run")
        if not 0 < fill_factor <= 1:
            raise ValueError("fill factor must be in (0, 1]")
        data_dir = Path(data_dir)
        data_dir.mkdir(parents=True, exist_ok=True)
        tree = cls(data_dir, sorted_run.config, fill_factor, recorder, create=True)
        reader = sorted_run.open(tree.recorder)
        pending: list[np.ndarray] = []
        pending_rows = 0
        for chunk in reader.iter_chunks():
            pending.append(chunk)
            pending_rows += len(chunk)
            while pending_rows >= tree.fill_target:
                block = np.concatenate(pending) if len(pending) > 1 else pending[0]
                tree._append_leaf(block[: tree.fill_target])
                rest = block[tree.fill_target:]
                pending = [rest] if len(rest) else []
                pending_rows = len(rest)
        if pending_rows:
            block = np.concatenate(pending) if len(pending) > 1 else pending[0]
            tree._append_leaf(block)
        reader.close()
        tree.leaves.flush()
        tree._build_inner()
        tree.save()
        return tree

    @classmethod
    def build(cls, data_dir: Path, series_iter, config: IndexConfig,
              fill_factor: float = 1.0, budget: MemoryBudget | None = None,
              recorder: Recorder | None = None) -> "CTree":
        """Ingest series, externally sort their entries, then bulk load."""
        data_dir = Path(data_dir)
        data_dir.mkdir(parents=True, exist_ok=True)
        recorder = recorder or NullRecorder()
        raw = RawSeriesFile(data_dir / RAW_FILE, config.n, recorder, create=True)

        def entry_stream():
            for series in series_iter:
                entry, _ = prepare_entry(series, config, raw)
                yield entry

        budget = budget or MemoryBudget(bytes=64 * 1024 * 1024)
        run = external_sort(entry_stream(), budget, data_dir / "sorted.run",
                            config, recorder, tmp_dir=data_dir / "tmp")
        raw.flush()
        raw.close()
        tree = cls.bulk_load(run, fill_factor, data_dir, recorder)
        Path(run.path).unlink(missing_ok=True)
        return tree

    def _append_leaf(self, arr: np.ndarray) -> None:
        page_id = self.leaves.append_page(arr)
        self.leaf_order.append(page_id)
        self.first_words.append(_first_key_word(arr))
        self.entry_count += len(arr)

    def _build_inner(self) -> None:
        """Bottom-up (separator, child) levels over the leaf directory."""
        self.inner_levels = []
        level = self.first_words
        while len(level) > INNER_FANOUT:
            level = level[::INNER_FANOUT]
            self.inner_levels.append(level)

    # -- persistence -----------------------------------------------------------

    def save(self) -> None:
        meta = {
            "fill_factor": self.fill_factor,
            "entry_count": self.entry_count,
            "leaf_order": self.leaf_order,
            "first_words": [format(wrd, "x") for wrd in self.first_words],
        }
        (self.data_dir / INNER_FILE).write_text(json.dumps(meta))
        self.config.save(self.data_dir / CONFIG_FILE)

    @classmethod
    def open(cls, data_dir: Path, recorder: Recorder | None = None) -> "CTree":
        data_dir = Path(data_dir)
        config = IndexConfig.load(data_dir / CONFIG_FILE)
        meta = json.loads((data_dir / INNER_FILE).read_text())
        tree = cls(data_dir, config, meta["fill_factor"], recorder)
        tree.leaf_order = list(meta["leaf_order"])
        tree.first_words = [int(wrd, 16) for wrd in meta["first_words"]]
        tree.entry_count = meta["entry_count"]
        tree._build_inner()
        return tree

    def close(self) -> None:
        self.leaves.close()
        self.raw.close()

    @property
    def size_bytes(self) -> int:
        inner = self.data_dir / INNER_FILE
        return self.leaves.file.size() + (inner.stat().st_size if inner.exists() else 0)

    # -- descent ----------------------------------------------------------------

    def _descend(self, key_word: int) -> int:
        """Index into leaf_order of the single leaf owning this key."""
        n = len(self.first_words)
        lo, hi = 0, n
        for k in range(len(self.inner_levels) - 1, -1, -1):
            level = self.inner_levels[k]
            stride = INNER_FANOUT ** (k + 1)  # leaf slots per separator at level k
            s, e = lo // stride, min(len(level), -(-hi // stride))
            idx = max(s, bisect_right(level, key_word, s, e) - 1)
            lo = idx * stride
            hi = min(hi, lo + stride)
        pos = bisect_right(self.first_words, key_word, lo, hi)
        return max(0, pos - 1)

    # -- updates ----------------------------------------------------------------

    def insert(self, entry: IndexEntry) -> None:
        """Place one entry in its owning leaf; split at the median on overflow."""
        if not self.leaf_order:
            arr = entries_to_array([entry], self.config)
            self._append_leaf(arr)
            self._build_inner()
            return
        word = entry.key << (MAX_KEY_BITS - self.config.key_width)
        slot = self._descend(word)
        page_id = self.leaf_order[slot]
        arr = self.leaves.read_page(page_id)
        pos = _insert_position(arr, word, entry.timestamp, entry.series_id)
        new = np.empty(len(arr) + 1, dtype=self.leaves.disk_dtype)
        new[:pos] = arr[:pos]
        new[pos] = entries_to_array([entry], self.config).astype(
            self.leaves.disk_dtype)[0]
        new[pos + 1:] = arr[pos:]
        if len(new) <= self.capacity:
            self.leaves.write_page(page_id, new)
            self.first_words[slot] = _first_key_word(new)
        else:
            mid = len(new) // 2
            left, right = new[:mid], new[mid:]
            self.leaves.write_page(page_id, left)
            right_id = self.leaves.append_page(right)
            self.first_words[slot] = _first_key_word(left)
            self.leaf_order.insert(slot + 1, right_id)
            self.first_words.insert(slot + 1, _first_key_word(right))
            self._build_inner()
        self.entry_count += 1

    def insert_series(self, series: DataSeries) -> IndexEntry:
        entry, _ = prepare_entry(series, self.config, self.raw)
        self.insert(entry)
        return entry

    # -- queries -----------------------------------------------------------------

    def approximate_search(self, query: DataSeries,
                           window: tuple[int, int] | None = None) -> SearchResult:
        trace = self.recorder.start_trace()
        best = Best()
        self._probe(QueryContext(query, self.config), best, window)
        self.recorder.finish_trace(trace)
        self._check_found(best, window)
        return best.result(exact=False, trace_id=trace.query_id)

    def exact_search(self, query: DataSeries,
                     window: tuple[int, int] | None = None) -> SearchResult:
        trace = self.recorder.start_trace()
        ctx = QueryContext(query, self.config)
        best = Best()
        seed_page = self._probe(ctx, best, window)
        leaf_file = self.leaves.file.name
        for page_id in self.leaf_order:
            if page_id == seed_page:
                continue  # the probe already evaluated every entry there
            arr = self.leaves.read_page(page_id)
            self.recorder.trace_event(leaf_file, page_id, OPENED_PARTITION)
            fetches = evaluate_entries(arr, ctx, best, self.recorder, self.raw,
                                       window=window, prune=True)
            if fetches == 0:
                self.recorder.trace_event(leaf_file, page_id, LOWER_BOUND_ONLY)
        self.recorder.finish_trace(trace)
        self._check_found(best, window)
        return best.result(exact=True, trace_id=trace.query_id)

    def _probe(self, ctx: QueryContext, best: Best,
               window: tuple[int, int] | None) -> int:
        """Descend to exactly one leaf, evaluate all its entries, return its page."""
        if self.entry_count == 0:
            raise EmptyIndex("index holds no entries")
        slot = self._descend(ctx.key_word)
        page_id = self.leaf_order[slot]
        arr = self.leaves.read_page(page_id)
        self.recorder.trace_event(self.leaves.file.name, page_id, OPENED_PARTITION)
        evaluate_entries(arr, ctx, best, self.recorder, self.raw,
                         window=window, prune=False)
        return page_id

    @staticmethod
    def _check_found(best: Best, window: tuple[int, int] | None) -> None:
        if not best.found:
            raise EmptyWindowResult(f"no entry inside window {window}")

    # -- verification helpers ------------------------------------------------------

    def iter_leaf_arrays(self):
        for page_id in self.leaf_order:
            yield page_id, self.leaves.read_page(page_id)

    def verify_order(self) -> bool:
        prev = None
        for _, arr in self.iter_leaf_arrays():
            for row in arr:
                tup = (int(row["key_hi"]), int(row["key_lo"]), int(row["ts"]),
                       int(row["sid"]))
                if prev is not None and tup < prev:
                    return False
                prev = tup
        return True
