"""Shared query machinery: query contexts, best-so-far tracking, and the
vectorized evaluate-a-page step used by both index engines."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import IndexConfig
from .errors import LengthMismatch
from .instrument import RAW_FETCH, Recorder
from .series import DataSeries, paa_values, znormalize
from .storage import RawSeriesFile, key_byte_matrix
from .summarize import (
    MAX_KEY_BITS,
    breakpoints,
    interleave_value,
    keys_to_symbols,
)


@dataclass
class SearchResult:
    """Outcome of one query: the winning series and how it was found."""

    series_id: int
    distance: float
    exact: bool
    timestamp: int = 0
    values: np.ndarray | None = None
    trace_id: str | None = None

    def as_dict(self) -> dict:
        return {
            "series_id": int(self.series_id),
            "distance": float(self.distance),
            "exact": bool(self.exact),
            "timestamp": int(self.timestamp),
            "values": None if self.values is None else [float(v) for v in self.values],
            "trace_id": self.trace_id,
        }


class QueryContext:
    """A query normalized, summarized, and keyed once, reused across runs.

    The per-segment squared gap from the query to every possible symbol
    interval is precomputed into one (w * 2^b) table, so the lower bound for a
    batch of keys is a single flat gather plus a row sum.
    """

    def __init__(self, query: DataSeries, config: IndexConfig):
        if len(query) != config.n:
            raise LengthMismatch(f"query length {len(query)} != index length {config.n}")
        self.config = config
        normalized = znormalize(query)
        self.values = normalized.values
        self.means = paa_values(self.values, config.w)
        table = breakpoints(config.b)
        self.lo_tab, self.hi_tab = table.bounds_arrays()
        symbols = np.searchsorted(table.cuts, self.means, side="right")
        self.key = interleave_value([int(s) for s in symbols], config.w, config.b)
        self.key_word = self.key << (MAX_KEY_BITS - config.key_width)
        gaps = (
            np.clip(self.lo_tab[None, :] - self.means[:, None], 0.0, None)
            + np.clip(self.means[:, None] - self.hi_tab[None, :], 0.0, None)
        )
        card = self.lo_tab.size
        self._penalty_flat = (config.n / config.w) * (gaps * gaps).ravel()
        self._segment_offsets = (np.arange(config.w) * card).astype(np.int64)

    def true_distance(self, values: np.ndarray) -> float:
        # (diff**2).sum() matches the batched ((matrix - q)**2).sum(axis=1)
        # bit for bit, so buffer hits and run hits rank identically
        diff = values - self.values
        return float(np.sqrt((diff * diff).sum()))

    def lower_bounds(self, arr: np.ndarray) -> np.ndarray:
        symbols = keys_to_symbols(key_byte_matrix(arr), self.config.w, self.config.b)
        return self.lower_bounds_from_symbols(symbols)

    def lower_bounds_from_symbols(self, symbols: np.ndarray) -> np.ndarray:
        flat = symbols + self._segment_offsets[None, :]
        return np.sqrt(self._penalty_flat[flat].sum(axis=1))


class Best:
    """Running nearest-neighbor candidate; ties go to the smaller series id."""

    def __init__(self) -> None:
        self.distance = math.inf
        self.series_id: int | None = None
        self.timestamp = 0
        self.values: np.ndarray | None = None

    def consider(self, distance: float, series_id: int, timestamp: int,
                 values: np.ndarray | None) -> bool:
        if distance < self.distance or (
            distance == self.distance
            and self.series_id is not None
            and series_id < self.series_id
        ):
            self.distance = distance
            self.series_id = series_id
            self.timestamp = timestamp
            self.values = None if values is None else np.array(values, dtype=np.float64)
            return True
        return False

    @property
    def found(self) -> bool:
        return self.series_id is not None

    def result(self, exact: bool, trace_id: str | None = None) -> SearchResult:
        assert self.series_id is not None
        return SearchResult(
            series_id=self.series_id, distance=self.distance, exact=exact,
            timestamp=self.timestamp, values=self.values, trace_id=trace_id,
        )


def window_mask(arr: np.ndarray, window: tuple[int, int] | None) -> np.ndarray | None:
    if window is None:
        return None
    start, end = window
    ts = arr["ts"]
    return (ts >= start) & (ts <= end)


def evaluate_entries(
    arr: np.ndarray,
    ctx: QueryContext,
    best: Best,
    recorder: Recorder,
    raw: RawSeriesFile | None,
    window: tuple[int, int] | None = None,
    prune: bool = True,
    symbols: np.ndarray | None = None,
) -> int:
    """Consider one chunk of entries against the running best; returns the
    number of true-distance evaluations.

    With prune=True only entries whose lower bound beats the best so far (at
    the moment they are reached) have their true distance computed; with
    prune=False every in-window entry is evaluated (probe semantics).  Out of
    window entries never become candidates, though their bounds are computed.
    `symbols` optionally supplies the chunk's pre-decoded key symbols.
    """
    if arr.size == 0:
        return 0
    mask = None
    if prune:
        if symbols is not None:
            lbs = ctx.lower_bounds_from_symbols(symbols)
        else:
            lbs = ctx.lower_bounds(arr)
        mask = lbs < best.distance
    wmask = window_mask(arr, window)
    if wmask is not None:
        mask = wmask if mask is None else (mask & wmask)
    materialized = ctx.config.materialized
    if materialized and not prune:
        # probe over inline payloads: one vectorized distance computation;
        # lexsort on (distance, sid) reproduces the in-order tie-breaking
        vals = arr["val"] if mask is None else arr["val"][mask]
        if len(vals) == 0:
            return 0
        sids = arr["sid"] if mask is None else arr["sid"][mask]
        tss = arr["ts"] if mask is None else arr["ts"][mask]
        dists = np.sqrt(((vals - ctx.values) ** 2).sum(axis=1))
        i = np.lexsort((sids, dists))[0]
        best.consider(float(dists[i]), int(sids[i]), int(tss[i]), vals[i])
        return int(len(vals))
    indices = np.nonzero(mask)[0] if mask is not None else range(len(arr))
    page_size = ctx.config.page_size
    fetches = 0
    for i in indices:
        if prune and lbs[i] >= best.distance:
            continue
        if materialized:
            values = arr["val"][i]
        else:
            if raw is None:
                raise LengthMismatch("non-materialized entries need the raw file")
            offset = int(arr["off"][i])
            values = raw.read_values(offset)
            recorder.trace_event(raw.file.name, offset // page_size, RAW_FETCH)
        fetches += 1
        best.consider(ctx.true_distance(values), int(arr["sid"][i]), int(arr["ts"][i]),
                      values)
    return fetches


def prepare_entry(series: DataSeries, config: IndexConfig,
                  raw: RawSeriesFile | None):
    """Normalize a series, derive its key, persist it raw, build the entry.

    Returns (entry, normalized_values); the payload rides on the entry only
    for materialized indexes, but the values are always returned so callers
    can keep buffered series queryable without storage reads.
    """
    from .storage import IndexEntry  # local to avoid cycle at import time

    normalized = znormalize(series)
    means = paa_values(normalized.values, config.w)
    table = breakpoints(config.b)
    symbols = np.searchsorted(table.cuts, means, side="right")
    key = interleave_value([int(s) for s in symbols], config.w, config.b)
    offset = raw.append(normalized) if raw is not None else 0
    entry = IndexEntry(
        key=key,
        series_id=series.id,
        raw_offset=offset,
        timestamp=series.timestamp,
        payload=normalized.values if config.materialized else None,
    )
    return entry, normalized.values
