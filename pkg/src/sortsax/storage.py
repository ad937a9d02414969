"""On-disk formats, the raw-series file, external sorting, and run merging.

Formats (bit-exact, see docs/formats.md):

* raw file: headerless fixed-size records `id u64le | timestamp u64le |
  n float64le`, so record k sits at byte offset k * record_size.
* run file: an 88-byte header, `entry_count` fixed-size records sorted by
  (key, timestamp, series_id), then a page-directory footer holding the first
  key of every page.  Record layout: `key 16B big-endian | series_id u64le |
  raw_offset u64le | timestamp u64le [| n float64le payload]`.  Key bytes are
  big-endian so byte-wise lexicographic order equals key order.

All reads and writes flow through `TrackedFile`, which feeds the I/O counters.
"""

from __future__ import annotations

import heapq
import os
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .config import IndexConfig
from .errors import (
    BudgetTooSmall,
    CorruptRun,
    EmptyInput,
    LengthMismatch,
    StorageFull,
)
from .instrument import NullRecorder, Recorder
from .series import DataSeries
from .summarize import KEY_BYTES, MAX_KEY_BITS

RUN_MAGIC = b"SRTSXRUN"
RUN_VERSION = 1
# magic, version, n, w, b, materialized, entry_count, min_key, max_key,
# min_ts, max_ts, page_size, header crc32
_HEADER_FMT = "<8sIIHHB3xQ16s16sQQII"
HEADER_SIZE = struct.calcsize(_HEADER_FMT)

# In-memory cap for the whole-array merge fast path (always sequential I/O;
# above this merge_runs streams through a bounded heap instead).
MERGE_ARRAY_CAP = 256 * 1024 * 1024


@dataclass(slots=True)
class IndexEntry:
    """One stored record: sortable key plus locator fields and optional payload."""

    key: int  # raw w*b-bit key value
    series_id: int
    raw_offset: int
    timestamp: int
    payload: np.ndarray | None = None

    def sort_tuple(self) -> tuple[int, int, int]:
        return (self.key, self.timestamp, self.series_id)


def entry_dtype(config: IndexConfig) -> np.dtype:
    """In-memory layout: native integers (numpy ops normalize to native order)."""
    fields = [
        ("key_hi", np.uint64),
        ("key_lo", np.uint64),
        ("sid", np.uint64),
        ("off", np.uint64),
        ("ts", np.uint64),
    ]
    if config.materialized:
        fields.append(("val", np.float64, (config.n,)))
    return np.dtype(fields)


def disk_dtype(config: IndexConfig) -> np.dtype:
    """On-disk layout: big-endian key halves, little-endian everything else."""
    fields = [
        ("key_hi", ">u8"),
        ("key_lo", ">u8"),
        ("sid", "<u8"),
        ("off", "<u8"),
        ("ts", "<u8"),
    ]
    if config.materialized:
        fields.append(("val", "<f8", (config.n,)))
    return np.dtype(fields)


def key_to_words(value: int, width: int) -> tuple[int, int]:
    """Raw key value -> (hi, lo) halves of the MSB-aligned 128-bit word."""
    word = value << (MAX_KEY_BITS - width)
    return word >> 64, word & 0xFFFFFFFFFFFFFFFF


def words_to_key(hi: int, lo: int, width: int) -> int:
    return ((int(hi) << 64) | int(lo)) >> (MAX_KEY_BITS - width)


def entries_to_array(entries: list[IndexEntry], config: IndexConfig) -> np.ndarray:
    arr = np.empty(len(entries), dtype=entry_dtype(config))
    shift = MAX_KEY_BITS - config.key_width
    for i, e in enumerate(entries):
        if e.key >> config.key_width:
            raise LengthMismatch(f"key {e.key:#x} wider than {config.key_width} bits")
        word = e.key << shift
        arr["key_hi"][i] = word >> 64
        arr["key_lo"][i] = word & 0xFFFFFFFFFFFFFFFF
        arr["sid"][i] = e.series_id
        arr["off"][i] = e.raw_offset
        arr["ts"][i] = e.timestamp
        if config.materialized:
            if e.payload is None:
                raise LengthMismatch("materialized entry without payload")
            arr["val"][i] = e.payload
    return arr


def array_to_entries(arr: np.ndarray, config: IndexConfig) -> list[IndexEntry]:
    shift = MAX_KEY_BITS - config.key_width
    out = []
    for row in arr:
        word = (int(row["key_hi"]) << 64) | int(row["key_lo"])
        out.append(
            IndexEntry(
                key=word >> shift,
                series_id=int(row["sid"]),
                raw_offset=int(row["off"]),
                timestamp=int(row["ts"]),
                payload=np.array(row["val"], dtype=np.float64) if config.materialized else None,
            )
        )
    return out


def sort_entry_array(arr: np.ndarray) -> np.ndarray:
    """Stable full order: key, then timestamp, then series id."""
    order = np.lexsort((arr["sid"], arr["ts"], arr["key_lo"], arr["key_hi"]))
    return arr[order]


def key_byte_matrix(arr: np.ndarray) -> np.ndarray:
    """(rows, 16) big-endian key bytes of an entry array."""
    hi = arr["key_hi"].astype(">u8").view(np.uint8).reshape(-1, 8)
    lo = arr["key_lo"].astype(">u8").view(np.uint8).reshape(-1, 8)
    return np.hstack((hi, lo))


class TrackedFile:
    """Thin binary file wrapper that reports every access to the recorder."""

    def __init__(self, path: Path, recorder: Recorder, create: bool = False,
                 writable: bool = False, max_bytes: int | None = None):
        self.path = Path(path)
        self.name = self.path.name
        self.recorder = recorder
        self.max_bytes = max_bytes
        if create:
            mode = "w+b"
        elif writable:
            mode = "r+b"
        else:
            mode = "rb"
        self._fh = open(self.path, mode)
        self._size = 0 if create else self.path.stat().st_size

    def size(self) -> int:
        return self._size

    def read_at(self, offset: int, size: int) -> bytes:
        self._fh.seek(offset)
        data = self._fh.read(size)
        self.recorder.record_read(self.name, offset, len(data))
        return data

    def write_at(self, offset: int, data: bytes) -> None:
        if self.max_bytes is not None and offset + len(data) > self.max_bytes:
            raise StorageFull(f"{self.name}: limit {self.max_bytes} bytes")
        self._fh.seek(offset)
        self._fh.write(data)
        self.recorder.record_write(self.name, offset, len(data))
        self._size = max(self._size, offset + len(data))

    def append(self, data: bytes) -> int:
        offset = self._size
        self.write_at(offset, data)
        return offset

    def flush(self) -> None:
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "TrackedFile":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class RawSeriesFile:
    """Headerless append-only store of the original (normalized) series.

    Offsets returned by append are plain byte offsets, record k at
    k * record_size; the series length is part of the engine config, not the
    file.
    """

    def __init__(self, path: Path, n: int, recorder: Recorder | None = None,
                 create: bool = False, max_bytes: int | None = None):
        self.n = n
        self.record_size = 16 + 8 * n
        self.recorder = recorder or NullRecorder()
        self.file = TrackedFile(path, self.recorder, create=create,
                                writable=not create, max_bytes=max_bytes)

    @property
    def count(self) -> int:
        return self.file.size() // self.record_size

    def append(self, series: DataSeries) -> int:
        if len(series) != self.n:
            raise LengthMismatch(f"series length {len(series)} != configured {self.n}")
        rec = struct.pack("<QQ", series.id, series.timestamp)
        rec += np.asarray(series.values, dtype="<f8").tobytes()
        return self.file.append(rec)

    def read(self, offset: int) -> DataSeries:
        data = self.file.read_at(offset, self.record_size)
        if len(data) != self.record_size:
            raise CorruptRun(f"short raw record at offset {offset}")
        sid, ts = struct.unpack_from("<QQ", data)
        values = np.frombuffer(data, dtype="<f8", offset=16)
        return DataSeries(id=sid, values=values.copy(), timestamp=ts)

    def read_values(self, offset: int) -> np.ndarray:
        data = self.file.read_at(offset + 16, 8 * self.n)
        return np.frombuffer(data, dtype="<f8").copy()

    def flush(self) -> None:
        self.file.flush()

    def close(self) -> None:
        self.file.close()


@dataclass
class SortedRun:
    """Handle to one sealed, sorted, immutable on-disk run."""

    path: Path
    config: IndexConfig
    entry_count: int
    min_key: int  # raw key values
    max_key: int
    min_ts: int
    max_ts: int

    @property
    def name(self) -> str:
        return Path(self.path).name

    @property
    def size_bytes(self) -> int:
        return Path(self.path).stat().st_size

    def open(self, recorder: Recorder | None = None) -> "RunReader":
        return RunReader(self.path, recorder or NullRecorder())


class RunWriter:
    """Stream sorted entries into a new run file; seals header and footer."""

    def __init__(self, path: Path, config: IndexConfig, recorder: Recorder | None = None,
                 buffer_entries: int = 8192):
        self.path = Path(path)
        self.config = config
        self.recorder = recorder or NullRecorder()
        self.dtype = entry_dtype(config)
        self.disk_dtype = disk_dtype(config)
        self.entry_size = self.dtype.itemsize
        self.entries_per_page = config.entries_per_page
        self.file = TrackedFile(self.path, self.recorder, create=True)
        self.file.append(b"\x00" * HEADER_SIZE)  # placeholder header
        self.count = 0
        self.min_ts: int | None = None
        self.max_ts: int | None = None
        self._first: np.void | None = None
        self._last: np.void | None = None
        self._page_keys: list[bytes] = []
        self._buffer: list[np.ndarray] = []
        self._buffered = 0
        self._buffer_limit = max(1, buffer_entries)

    def append_array(self, arr: np.ndarray) -> None:
        if arr.size == 0:
            return
        if self._first is None:
            self._first = arr[0].copy()
        self._last = arr[-1].copy()
        ts = arr["ts"]
        lo, hi = int(ts.min()), int(ts.max())
        self.min_ts = lo if self.min_ts is None else min(self.min_ts, lo)
        self.max_ts = hi if self.max_ts is None else max(self.max_ts, hi)
        # collect the first key of every page boundary this chunk crosses
        start = self.count
        first_boundary = -(-start // self.entries_per_page) * self.entries_per_page
        for pos in range(first_boundary, start + len(arr), self.entries_per_page):
            row = arr[pos - start]
            word = (int(row["key_hi"]) << 64) | int(row["key_lo"])
            self._page_keys.append(word.to_bytes(KEY_BYTES, "big"))
        self.count += len(arr)
        self._buffer.append(arr)
        self._buffered += len(arr)
        if self._buffered >= self._buffer_limit:
            self._flush_buffer()

    def _flush_buffer(self) -> None:
        if not self._buffer:
            return
        data = np.concatenate(self._buffer) if len(self._buffer) > 1 else self._buffer[0]
        self.file.append(data.astype(self.disk_dtype, copy=False).tobytes())
        self._buffer = []
        self._buffered = 0

    def finalize(self) -> SortedRun:
        self._flush_buffer()
        if self.count == 0:
            raise EmptyInput("refusing to seal an empty run")
        footer = struct.pack("<I", len(self._page_keys)) + b"".join(self._page_keys)
        self.file.append(footer)
        shift = MAX_KEY_BITS - self.config.key_width
        first_word = (int(self._first["key_hi"]) << 64) | int(self._first["key_lo"])
        last_word = (int(self._last["key_hi"]) << 64) | int(self._last["key_lo"])
        header = _pack_header(
            self.config, self.count,
            first_word.to_bytes(KEY_BYTES, "big"), last_word.to_bytes(KEY_BYTES, "big"),
            self.min_ts, self.max_ts,
        )
        self.file.write_at(0, header)
        self.file.flush()
        self.file.close()
        return SortedRun(
            path=self.path, config=self.config, entry_count=self.count,
            min_key=first_word >> shift, max_key=last_word >> shift,
            min_ts=self.min_ts, max_ts=self.max_ts,
        )


def _pack_header(config: IndexConfig, count: int, min_key: bytes, max_key: bytes,
                 min_ts: int, max_ts: int) -> bytes:
    body = struct.pack(
        _HEADER_FMT, RUN_MAGIC, RUN_VERSION, config.n, config.w, config.b,
        1 if config.materialized else 0, count, min_key, max_key,
        min_ts, max_ts, config.page_size, 0,
    )
    crc = zlib.crc32(body[:-4])
    return body[:-4] + struct.pack("<I", crc)


def open_run(path: Path, recorder: Recorder | None = None) -> SortedRun:
    """Validate a run file's header and return its handle."""
    reader = RunReader(path, recorder or NullRecorder())
    run = reader.run
    reader.close()
    return run


class RunReader:
    """Sequential/positional access to a sealed run."""

    def __init__(self, path: Path, recorder: Recorder):
        self.path = Path(path)
        self.recorder = recorder
        self.file = TrackedFile(self.path, recorder)
        raw = self.file.read_at(0, HEADER_SIZE)
        if len(raw) != HEADER_SIZE:
            raise CorruptRun(f"{self.path.name}: truncated header")
        (magic, version, n, w, b, materialized, count, min_key, max_key,
         min_ts, max_ts, page_size, crc) = struct.unpack(_HEADER_FMT, raw)
        if magic != RUN_MAGIC:
            raise CorruptRun(f"{self.path.name}: bad magic")
        if zlib.crc32(raw[:-4]) != crc:
            raise CorruptRun(f"{self.path.name}: header checksum mismatch")
        if version != RUN_VERSION:
            raise CorruptRun(f"{self.path.name}: unsupported version {version}")
        self.config = IndexConfig(n=n, w=w, b=b, page_size=page_size,
                                  materialized=bool(materialized))
        self.dtype = entry_dtype(self.config)
        self.disk_dtype = disk_dtype(self.config)
        self.entry_size = self.dtype.itemsize
        self.entry_count = count
        shift = MAX_KEY_BITS - self.config.key_width
        self.min_key = int.from_bytes(min_key, "big") >> shift
        self.max_key = int.from_bytes(max_key, "big") >> shift
        self.min_ts = min_ts
        self.max_ts = max_ts
        self.entries_per_page = self.config.entries_per_page
        self.page_count = -(-count // self.entries_per_page) if count else 0
        footer_off = HEADER_SIZE + count * self.entry_size
        expected = footer_off + 4 + self.page_count * KEY_BYTES
        if self.file.size() != expected:
            raise CorruptRun(
                f"{self.path.name}: size {self.file.size()} != expected {expected}"
            )
        self._footer_off = footer_off
        self._page_keys: np.ndarray | None = None
        self._symbols: np.ndarray | None = None
        self.run = SortedRun(
            path=self.path, config=self.config, entry_count=count,
            min_key=self.min_key, max_key=self.max_key, min_ts=min_ts, max_ts=max_ts,
        )

    @property
    def name(self) -> str:
        return self.path.name

    def page_first_keys(self) -> np.ndarray:
        """(pages, 16) big-endian first key of every page, from the footer."""
        if self._page_keys is None:
            raw = self.file.read_at(self._footer_off, 4 + self.page_count * KEY_BYTES)
            n_pages = struct.unpack_from("<I", raw)[0]
            if n_pages != self.page_count:
                raise CorruptRun(f"{self.path.name}: footer page count mismatch")
            self._page_keys = np.frombuffer(
                raw, dtype=np.uint8, offset=4
            ).reshape(self.page_count, KEY_BYTES).copy()
        return self._page_keys

    def read_slice(self, start: int, count: int) -> np.ndarray:
        """Zero-copy structured view over the records; key halves are the
        on-disk big-endian fields (numeric values still compare correctly),
        every other field reads natively on little-endian hosts."""
        count = max(0, min(count, self.entry_count - start))
        if count == 0:
            return np.empty(0, dtype=self.disk_dtype)
        data = self.file.read_at(HEADER_SIZE + start * self.entry_size,
                                 count * self.entry_size)
        return np.frombuffer(data, dtype=self.disk_dtype)

    def read_page(self, page: int) -> np.ndarray:
        return self.read_slice(page * self.entries_per_page, self.entries_per_page)

    def iter_chunks(self, chunk_entries: int | None = None) -> Iterator[np.ndarray]:
        step = chunk_entries or self.entries_per_page
        for start in range(0, self.entry_count, step):
            yield self.read_slice(start, step)

    def cached_symbols(self) -> np.ndarray:
        """Decoded (entries, w) symbol matrix for the whole run, memoized.

        Runs are immutable, so decoding each key's segment symbols once and
        reusing them across queries only saves CPU; the record bytes are still
        read by every scan, keeping the I/O counters faithful.
        """
        if self._symbols is None:
            from .summarize import keys_to_symbols

            chunks = []
            for chunk in self.iter_chunks(chunk_entries=65536):
                chunks.append(keys_to_symbols(key_byte_matrix(chunk),
                                              self.config.w, self.config.b))
            self._symbols = np.concatenate(chunks) if len(chunks) > 1 else chunks[0]
        return self._symbols

    def record_at(self, index: int) -> np.ndarray:
        return self.read_slice(index, 1)

    def key_word_at(self, index: int) -> int:
        row = self.record_at(index)[0]
        return (int(row["key_hi"]) << 64) | int(row["key_lo"])

    def locate_page(self, key_word: int) -> int:
        """Page whose key range would hold key_word, via the footer directory."""
        keys = self.page_first_keys()
        target = np.frombuffer(key_word.to_bytes(KEY_BYTES, "big"), dtype=np.uint8)
        # last page whose first key <= target
        lo, hi = 0, self.page_count - 1
        best = 0
        while lo <= hi:
            mid = (lo + hi) // 2
            if tuple(keys[mid]) <= tuple(target):
                best = mid
                lo = mid + 1
            else:
                hi = mid - 1
        return best

    def lower_bound_index(self, key_word: int) -> int:
        """First record index with key >= key_word (binary search, random reads)."""
        lo, hi = 0, self.entry_count
        while lo < hi:
            mid = (lo + hi) // 2
            if self.key_word_at(mid) < key_word:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def upper_bound_index(self, key_word: int) -> int:
        """First record index with key > key_word."""
        lo, hi = 0, self.entry_count
        while lo < hi:
            mid = (lo + hi) // 2
            if self.key_word_at(mid) <= key_word:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def verify_sorted(self) -> bool:
        prev: tuple | None = None
        for chunk in self.iter_chunks(chunk_entries=65536):
            if chunk.size == 0:
                continue
            cols = [chunk["key_hi"], chunk["key_lo"], chunk["ts"], chunk["sid"]]
            if prev is not None:
                cols = [np.concatenate(([p], c)) for p, c in zip(prev, cols)]
            if _any_descending(*cols):
                return False
            prev = tuple(int(c[-1]) for c in cols)
        return True

    def close(self) -> None:
        self.file.close()


def _any_descending(khi, klo, ts, sid) -> bool:
    """True if any adjacent row pair violates (khi, klo, ts, sid) order."""
    a, b = slice(None, -1), slice(1, None)
    eq1 = khi[b] == khi[a]
    eq2 = eq1 & (klo[b] == klo[a])
    eq3 = eq2 & (ts[b] == ts[a])
    less = (
        (khi[b] < khi[a])
        | (eq1 & (klo[b] < klo[a]))
        | (eq2 & (ts[b] < ts[a]))
        | (eq3 & (sid[b] < sid[a]))
    )
    return bool(less.any())


def scan(run: SortedRun, key_range: tuple[int, int] | None = None,
         recorder: Recorder | None = None) -> Iterator[IndexEntry]:
    """Yield a run's entries in key order, optionally clipped to [lo, hi].

    Range endpoints are raw key values, inclusive both sides; the first and
    last qualifying records are located by binary search over the fixed-size
    records, then read sequentially.
    """
    reader = run.open(recorder)
    try:
        shift = MAX_KEY_BITS - reader.config.key_width
        if key_range is None:
            start, stop = 0, reader.entry_count
        else:
            lo, hi = key_range
            start = reader.lower_bound_index(lo << shift)
            stop = reader.upper_bound_index(hi << shift)
        pos = start
        while pos < stop:
            chunk = reader.read_slice(pos, min(reader.entries_per_page, stop - pos))
            for e in array_to_entries(chunk, reader.config):
                yield e
            pos += len(chunk)
    finally:
        reader.close()


@dataclass(frozen=True)
class MemoryBudget:
    """Bytes available to buffer entries during sort and merge."""

    bytes: int

    def entries(self, entry_size: int) -> int:
        return self.bytes // entry_size


def external_sort(entries: Iterable[IndexEntry], budget: MemoryBudget,
                  out_path: Path, config: IndexConfig,
                  recorder: Recorder | None = None,
                  tmp_dir: Path | None = None) -> SortedRun:
    """Two-pass external sort: budget-sized sorted runs, then one k-way merge.

    Pass one consumes the input stream once, cutting it into sorted runs of at
    most `budget` bytes each; pass two streams those runs through a heap into
    the output.  Each pass bumps the read-pass counter once.  Raises
    BudgetTooSmall when the run count exceeds the merge fan-in the budget can
    hold (one record per run), i.e. when input exceeds budget^2/entry_size.
    """
    recorder = recorder or NullRecorder()
    dtype = entry_dtype(config)
    entry_size = dtype.itemsize
    if budget.bytes < 2 * entry_size:
        raise BudgetTooSmall(f"budget {budget.bytes} < two records ({2 * entry_size})")
    run_entries = max(1, budget.entries(entry_size))
    tmp_dir = Path(tmp_dir) if tmp_dir is not None else Path(out_path).parent
    tmp_dir.mkdir(parents=True, exist_ok=True)

    initial: list[SortedRun] = []
    buf: list[IndexEntry] = []

    def cut_run(target: Path) -> SortedRun:
        arr = sort_entry_array(entries_to_array(buf, config))
        writer = RunWriter(target, config, recorder)
        writer.append_array(arr)
        return writer.finalize()

    it = iter(entries)
    for entry in it:
        buf.append(entry)
        if len(buf) >= run_entries:
            # peek: if the stream is exhausted this buffer is the only run
            nxt = next(it, None)
            path = tmp_dir / f"sort-tmp-{len(initial):06d}.run"
            initial.append(cut_run(path))
            buf = []
            if nxt is None:
                break
            buf.append(nxt)
    if not initial and not buf:
        raise EmptyInput("external_sort received no entries")
    if buf:
        if not initial:
            run = cut_run(Path(out_path))
            recorder.note_read_pass()
            return run
        initial.append(cut_run(tmp_dir / f"sort-tmp-{len(initial):06d}.run"))
    recorder.note_read_pass()
    if len(initial) == 1:
        os.replace(initial[0].path, out_path)
        final = initial[0]
        final.path = Path(out_path)
        return final

    fan_in = budget.entries(entry_size)
    if len(initial) > fan_in:
        raise BudgetTooSmall(
            f"{len(initial)} runs exceed merge fan-in {fan_in} for this budget"
        )
    chunk = max(1, budget.entries(entry_size) // (len(initial) + 1))
    run = _stream_merge(initial, Path(out_path), config, recorder, chunk)
    recorder.note_read_pass()
    for r in initial:
        Path(r.path).unlink(missing_ok=True)
    return run


def merge_runs(runs: list[SortedRun], out_path: Path,
               recorder: Recorder | None = None,
               array_cap: int = MERGE_ARRAY_CAP) -> SortedRun:
    """k-way merge of sorted runs into one, sequential I/O only.

    Small merges load every run and do one stable array sort; large ones
    stream through a heap with page-sized buffers.  Output timestamp metadata
    is the min/max over the inputs.
    """
    recorder = recorder or NullRecorder()
    if not runs:
        raise EmptyInput("nothing to merge")
    config = runs[0].config
    if len(runs) == 1:
        src = runs[0]
        reader = src.open(recorder)
        writer = RunWriter(out_path, config, recorder)
        for chunk in reader.iter_chunks():
            writer.append_array(chunk)
        reader.close()
        return writer.finalize()
    total_bytes = sum(r.entry_count for r in runs) * entry_dtype(config).itemsize
    if total_bytes <= array_cap:
        readers = [r.open(recorder) for r in runs]
        arrays = []
        for reader in readers:
            arrays.extend(reader.iter_chunks())
            reader.close()
        merged = sort_entry_array(np.concatenate(arrays))
        writer = RunWriter(out_path, config, recorder)
        writer.append_array(merged)
        return writer.finalize()
    return _stream_merge(runs, Path(out_path), config, recorder,
                         chunk_entries=config.entries_per_page)


def _stream_merge(runs: list[SortedRun], out_path: Path, config: IndexConfig,
                  recorder: Recorder, chunk_entries: int) -> SortedRun:
    readers = [r.open(recorder) for r in runs]

    def rows(reader: RunReader) -> Iterator[tuple]:
        for chunk in reader.iter_chunks(chunk_entries):
            for i in range(len(chunk)):
                row = chunk[i]
                yield (int(row["key_hi"]), int(row["key_lo"]), int(row["ts"]),
                       int(row["sid"]), chunk, i)

    writer = RunWriter(out_path, config, recorder,
                       buffer_entries=max(1, chunk_entries))
    pending = np.empty(chunk_entries, dtype=disk_dtype(config))
    fill = 0
    for item in heapq.merge(*(rows(r) for r in readers), key=lambda t: t[:4]):
        pending[fill] = item[4][item[5]]
        fill += 1
        if fill == chunk_entries:
            writer.append_array(pending.copy())
            fill = 0
    if fill:
        writer.append_array(pending[:fill].copy())
    for reader in readers:
        reader.close()
    return writer.finalize()
