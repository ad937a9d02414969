"""Window-constrained nearest-neighbor strategies: PP, TP, and BTP.

* PP (post-processing): run the ordinary search over everything, but entries
  whose timestamp falls outside the window can never become the answer.
* TP (temporal partitioning): one sealed partition per buffer flush, never
  merged; partitions disjoint from the window are skipped wholesale.
* BTP (bounded temporal partitioning): the log-structured index in ordered
  mode, whose tiering merges only time-adjacent runs, so TP-style skipping
  applies while the total partition count stays bounded by the growth factor
  times the level count.

Window endpoints are inclusive on both sides.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .clsm import CLSM
from .config import IndexConfig
from .errors import OutOfOrderTimestamp, SortsaxError
from .instrument import Recorder
from .search import SearchResult
from .series import DataSeries
from .storage import SortedRun


@dataclass(frozen=True)
class TimeWindow:
    """Inclusive logical-time interval [start_ts, end_ts]."""

    start_ts: int
    end_ts: int

    def __post_init__(self) -> None:
        if self.start_ts > self.end_ts:
            raise ValueError(f"window start {self.start_ts} > end {self.end_ts}")

    def as_tuple(self) -> tuple[int, int]:
        return (self.start_ts, self.end_ts)


def normalize_window(window) -> tuple[int, int] | None:
    """Accept TimeWindow, (start, end), or None (full history)."""
    if window is None:
        return None
    if isinstance(window, TimeWindow):
        return window.as_tuple()
    start, end = window
    return TimeWindow(int(start), int(end)).as_tuple()


def pp_search(index, query: DataSeries, window, mode: str = "exact") -> SearchResult:
    """Post-processing strategy on any index: filter timestamps at match time."""
    win = normalize_window(window)
    if mode == "exact":
        return index.exact_search(query, window=win)
    return index.approximate_search(query, window=win)


class TemporalPartitions(CLSM):
    """TP structure: buffer flushes seal partitions that are never merged."""

    def __init__(self, data_dir: Path, config: IndexConfig,
                 buffer_bytes: int = 4 * 1024 * 1024,
                 recorder: Recorder | None = None, create: bool = False):
        super().__init__(data_dir, config, buffer_bytes=buffer_bytes,
                         growth_factor=2, recorder=recorder, create=create,
                         ordered_timestamps=True)

    def _compact(self) -> None:
        pass  # partitions accumulate; that is the point of TP

    def insert(self, entry, values=None) -> None:
        # TP seals eagerly the moment the buffer fills, so the sealed-partition
        # count after n arrivals is exactly floor(n / buffer_entries)
        super().insert(entry, values)
        if len(self.buffer) >= self.buffer_entries:
            self.flush()

    @property
    def partitions(self) -> list[SortedRun]:
        """Sealed partitions in creation (= time) order."""
        if not self.levels:
            return []
        return [lr.run for lr in sorted(self.levels[0], key=lambda lr: lr.sequence)]


def tp_flush(stream: Iterable[DataSeries], buffer_entries: int, data_dir: Path,
             config: IndexConfig, recorder: Recorder | None = None) -> TemporalPartitions:
    """Feed an in-order stream, sealing one partition per buffer fill."""
    parts = TemporalPartitions(
        data_dir, config, buffer_bytes=buffer_entries * config.entry_size,
        recorder=recorder, create=True,
    )
    for series in stream:
        parts.insert_series(series)
    return parts


def tp_search(parts: TemporalPartitions, query: DataSeries, window,
              mode: str = "exact") -> SearchResult:
    """Open only partitions whose time range intersects the window."""
    return parts._search(query, normalize_window(window),
                         exact=(mode == "exact"), skip_disjoint=True)


@dataclass
class TemporalPartitionSet:
    """Time-ordered view of an index's partitions with BTP validation."""

    partitions: list[SortedRun]

    def check_disjoint_ordered(self) -> bool:
        for prev, cur in zip(self.partitions, self.partitions[1:]):
            if prev.max_ts >= cur.min_ts:
                return False
        return True

    def check_oldest_in_largest(self) -> bool:
        if len(self.partitions) <= 1:
            return True
        largest = max(p.entry_count for p in self.partitions)
        return self.partitions[0].entry_count == largest

    def check_sizes_grade_by_age(self) -> bool:
        sizes = [p.entry_count for p in self.partitions]
        return all(a >= b for a, b in zip(sizes, sizes[1:]))


def btp_maintain(lsm: CLSM) -> TemporalPartitionSet:
    """Validated time-ordered view of an ordered CLSM's runs.

    The CLSM must have been created with ordered_timestamps=True; its tiering
    then only ever merges time-adjacent runs, which is what keeps this view's
    invariants (disjoint, ordered, oldest data in the largest run) true.
    """
    if not lsm.ordered_timestamps:
        raise OutOfOrderTimestamp(
            "BTP requires an index created with ordered_timestamps=True"
        )
    view = TemporalPartitionSet(partitions=[lr.run for lr in lsm.runs_by_age()])
    if not view.check_disjoint_ordered():
        raise SortsaxError("BTP invariant violated: runs overlap in time")
    return view


def btp_search(lsm: CLSM, query: DataSeries, window,
               mode: str = "exact") -> SearchResult:
    """TP-style run skipping plus PP filtering inside intersecting runs."""
    if not lsm.ordered_timestamps:
        raise OutOfOrderTimestamp(
            "BTP requires an index created with ordered_timestamps=True"
        )
    return lsm._search(query, normalize_window(window),
                       exact=(mode == "exact"), skip_disjoint=True)
