"""Quantized summaries, sortable bit-interleaved keys, and the pruning bound.

Each z-normalized series is reduced to w segment means (PAA), each mean is
quantized into a b-bit symbol against standard-normal breakpoints, and the
symbols are interleaved round-robin MSB-first into one unsigned key.  Sorting
by that key groups series that are similar across *all* segments, because
every segment contributes its most significant bit before any segment
contributes its next one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BitsOutOfRange, SegmentCountMismatch, WidthMismatch
from .series import DataSeries, PAAVector, paa_values

MAX_BITS = 16
MAX_SEGMENTS = 64
MAX_KEY_BITS = 128
KEY_BYTES = MAX_KEY_BITS // 8


@dataclass(frozen=True)
class BreakpointTable:
    """Sorted standard-normal quantiles splitting the real line into 2^b bins."""

    b: int
    cuts: np.ndarray

    @property
    def cardinality(self) -> int:
        return 1 << self.b

    def interval(self, symbol: int) -> tuple[float, float]:
        """[lo, hi] bounds of a symbol's bin; open ends are +-inf."""
        lo = -math.inf if symbol == 0 else float(self.cuts[symbol - 1])
        hi = math.inf if symbol == self.cardinality - 1 else float(self.cuts[symbol])
        return lo, hi

    def bounds_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-symbol (lo, hi) lookup vectors, +-inf at the ends."""
        lo = np.concatenate(([-np.inf], self.cuts))
        hi = np.concatenate((self.cuts, [np.inf]))
        return lo, hi


def _normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


@lru_cache(maxsize=None)
def breakpoints(b: int) -> BreakpointTable:
    """Breakpoint table for b bits: cuts[i] solves CDF(x) = (i+1)/2^b.

    The inverse CDF is found by bisection on an erf-based normal CDF to 1e-12,
    so no statistical tables are consulted.  Tables are cached per b.
    """
    if not 1 <= b <= MAX_BITS:
        raise BitsOutOfRange(f"bits per segment must be in 1..{MAX_BITS}, got {b}")
    card = 1 << b
    cuts = np.empty(card - 1, dtype=np.float64)
    for i in range(card - 1):
        target = (i + 1) / card
        lo, hi = -9.0, 9.0
        while hi - lo > 1e-12:
            mid = 0.5 * (lo + hi)
            if _normal_cdf(mid) < target:
                lo = mid
            else:
                hi = mid
        cuts[i] = 0.5 * (lo + hi)
    return BreakpointTable(b=b, cuts=cuts)


@dataclass(frozen=True)
class ISAXSummary:
    """w quantized segment symbols, each below 2^b."""

    symbols: tuple[int, ...]
    w: int
    b: int

    def __post_init__(self) -> None:
        if not 1 <= self.b <= MAX_BITS:
            raise BitsOutOfRange(f"bits per segment must be in 1..{MAX_BITS}")
        if not 1 <= self.w <= MAX_SEGMENTS or self.w * self.b > MAX_KEY_BITS:
            raise WidthMismatch(
                f"need 1 <= w <= {MAX_SEGMENTS} and w*b <= {MAX_KEY_BITS}, got w={self.w} b={self.b}"
            )
        if len(self.symbols) != self.w:
            raise SegmentCountMismatch(f"{len(self.symbols)} symbols for w={self.w}")
        card = 1 << self.b
        if any(not 0 <= s < card for s in self.symbols):
            raise BitsOutOfRange(f"symbol out of range for b={self.b}")


@dataclass(frozen=True, order=True)
class SortableKey:
    """Unsigned bit-string of width w*b, MSB-aligned inside a 128-bit word.

    `value` holds the raw width-bit integer, so comparing two same-width keys
    as integers equals comparing their MSB-aligned words, which equals
    byte-wise lexicographic order of :meth:`to_bytes` output.
    """

    value: int
    width: int

    def __post_init__(self) -> None:
        if not 0 < self.width <= MAX_KEY_BITS:
            raise WidthMismatch(f"key width must be in 1..{MAX_KEY_BITS}")
        if not 0 <= self.value < (1 << self.width):
            raise WidthMismatch(f"value does not fit in {self.width} bits")

    @property
    def word128(self) -> int:
        """The key shifted into the top of a 128-bit word."""
        return self.value << (MAX_KEY_BITS - self.width)

    def to_bytes(self) -> bytes:
        """16 big-endian bytes of the MSB-aligned word; lexicographic = key order."""
        return self.word128.to_bytes(KEY_BYTES, "big")

    @classmethod
    def from_bytes(cls, raw: bytes, width: int) -> "SortableKey":
        if len(raw) != KEY_BYTES:
            raise WidthMismatch(f"expected {KEY_BYTES} key bytes, got {len(raw)}")
        word = int.from_bytes(raw, "big")
        return cls(value=word >> (MAX_KEY_BITS - width), width=width)


def summarize(series: DataSeries, w: int, b: int) -> ISAXSummary:
    """Quantize a z-normalized series into w symbols of b bits.

    Symbol j counts the cuts <= segment mean j, so a value sitting exactly on
    a cut lands in the higher interval.
    """
    means = paa_values(series.values, w)
    return summarize_paa(means, b)


def summarize_paa(means: np.ndarray, b: int) -> ISAXSummary:
    table = breakpoints(b)
    symbols = np.searchsorted(table.cuts, np.asarray(means, dtype=np.float64), side="right")
    return ISAXSummary(symbols=tuple(int(s) for s in symbols), w=len(means), b=b)


def interleave(summary: ISAXSummary) -> SortableKey:
    """Round-robin MSB-first interleave: output bit i*w+j is bit i of symbol j."""
    return SortableKey(
        value=interleave_value(summary.symbols, summary.w, summary.b),
        width=summary.w * summary.b,
    )


def interleave_value(symbols, w: int, b: int) -> int:
    value = 0
    for i in range(b):  # i = 0 is each symbol's MSB
        shift = b - 1 - i
        for j in range(w):
            value = (value << 1) | ((symbols[j] >> shift) & 1)
    return value


def deinterleave(key: SortableKey, w: int, b: int) -> ISAXSummary:
    """Exact inverse of :func:`interleave`."""
    if key.width != w * b:
        raise WidthMismatch(f"key width {key.width} != w*b = {w * b}")
    symbols = [0] * w
    value = key.value
    for i in range(b):
        for j in range(w):
            bit_pos = i * w + j  # 0 = MSB of the key
            bit = (value >> (w * b - 1 - bit_pos)) & 1
            symbols[j] |= bit << (b - 1 - i)
    return ISAXSummary(symbols=tuple(symbols), w=w, b=b)


def lower_bound_distance(
    query_paa: PAAVector, summary: ISAXSummary, table: BreakpointTable
) -> float:
    """Distance from a query to a summary's quantization box; never exceeds
    the true Euclidean distance to any series carrying that summary.

    Per segment the gap is 0 when the query mean falls inside the symbol's
    interval, else the distance to the nearer interval edge; gaps combine as
    sqrt(n/w) * sqrt(sum of squared gaps).
    """
    if query_paa.w != summary.w:
        raise SegmentCountMismatch(f"query w={query_paa.w} vs summary w={summary.w}")
    if table.b != summary.b:
        raise BitsOutOfRange(f"table built for b={table.b}, summary has b={summary.b}")
    lo_tab, hi_tab = table.bounds_arrays()
    sym = np.fromiter(summary.symbols, dtype=np.int64, count=summary.w)
    return float(
        lower_bound_batch(query_paa.means, sym[np.newaxis, :], lo_tab, hi_tab, query_paa.n)[0]
    )


def lower_bound_batch(
    query_means: np.ndarray,
    symbols: np.ndarray,
    lo_tab: np.ndarray,
    hi_tab: np.ndarray,
    n: int,
) -> np.ndarray:
    """Vectorized lower bounds for a (rows, w) symbol matrix against one query."""
    lo = lo_tab[symbols]
    hi = hi_tab[symbols]
    below = np.clip(lo - query_means, 0.0, None)
    above = np.clip(query_means - hi, 0.0, None)
    gap = below + above  # at most one side is nonzero per segment
    w = symbols.shape[1]
    return np.sqrt((n / w) * np.einsum("ij,ij->i", gap, gap))


# -- batch helpers over packed key bytes ------------------------------------


def keys_to_symbols(key_bytes: np.ndarray, w: int, b: int) -> np.ndarray:
    """Decode (rows, 16) big-endian key bytes into a (rows, w) symbol matrix."""
    if key_bytes.ndim != 2 or key_bytes.shape[1] != KEY_BYTES:
        raise WidthMismatch("expected a (rows, 16) byte matrix")
    bits = np.unpackbits(key_bytes, axis=1)[:, : w * b]  # MSB-first, matches alignment
    pow2 = (1 << np.arange(b - 1, -1, -1)).astype(np.int32)
    # key bit i*w + j is bit i of symbol j, so a (rows, b, w) view lines up
    return np.einsum("rbw,b->rw", bits.reshape(-1, b, w).astype(np.int32), pow2)
