"""Raw data series: normalization, PAA, distances, generation, and file I/O.

A data series is a fixed-length vector of reals plus an id and a logical
arrival timestamp.  Everything downstream (summarization, indexing, search)
assumes series have been z-normalized with :func:`znormalize`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import LengthMismatch, NonDivisibleLength

# Population stddev below this is treated as a constant series.
CONSTANT_EPS = 1e-12


@dataclass(frozen=True)
class DataSeries:
    """One fixed-length series with identity and logical arrival time."""

    id: int
    values: np.ndarray
    timestamp: int = 0

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise LengthMismatch("series values must be a non-empty 1-d vector")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class PAAVector:
    """Piecewise aggregate approximation: w segment means of an n-point series."""

    means: np.ndarray
    n: int
    w: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "means", np.asarray(self.means, dtype=np.float64))


def znormalize(series: DataSeries) -> DataSeries:
    """Shift/scale to mean 0 and population stddev 1; id and timestamp kept.

    Constant series (stddev below 1e-12) come back as all zeros instead of
    raising, so flat stream segments never crash a query.
    """
    values = znormalize_values(series.values)
    return DataSeries(id=series.id, values=values, timestamp=series.timestamp)


def znormalize_values(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    mean = values.mean()
    std = values.std()  # population (divide-by-n) stddev
    if std < CONSTANT_EPS:
        return np.zeros_like(values)
    return (values - mean) / std


def paa(series: DataSeries, w: int) -> PAAVector:
    """Average the series over w equal-length contiguous segments."""
    means = paa_values(series.values, w)
    return PAAVector(means=means, n=len(series), w=w)


def paa_values(values: np.ndarray, w: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if w <= 0 or n % w != 0:
        raise NonDivisibleLength(f"segment count {w} does not divide length {n}")
    return values.reshape(w, n // w).mean(axis=1)


def euclidean_distance(a: DataSeries, b: DataSeries) -> float:
    """Plain Euclidean distance between two equal-length series."""
    if len(a) != len(b):
        raise LengthMismatch(f"lengths differ: {len(a)} vs {len(b)}")
    diff = a.values - b.values
    return float(np.sqrt(np.dot(diff, diff)))


def random_walk_generate(count: int, length: int, seed: int) -> Iterator[DataSeries]:
    """Yield `count` random walks of `length` steps, deterministic per seed.

    Each series is the cumulative sum of i.i.d. standard normal steps drawn
    from a PCG64 generator seeded explicitly, so a fixed seed reproduces the
    stream bit for bit.  Ids and timestamps are the arrival index.
    """
    if count <= 0 or length <= 0:
        raise ValueError("count and length must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    for i in range(count):
        steps = rng.standard_normal(length)
        yield DataSeries(id=i, values=np.cumsum(steps), timestamp=i)


# ---------------------------------------------------------------------------
# Dataset file formats.
#
# (a) headerless binary: little-endian float32, fixed record length n that is
#     declared out-of-band.  This is what `sortsax generate` emits.
# (b) CSV: one series per line, comma-separated values.


def write_binary_dataset(path, series_iter: Iterable[DataSeries]) -> int:
    """Write series as headerless little-endian float32 records; returns count."""
    count = 0
    with open(path, "wb") as fh:
        for s in series_iter:
            fh.write(np.asarray(s.values, dtype="<f4").tobytes())
            count += 1
    return count


def read_binary_dataset(path, length: int, start_id: int = 0) -> Iterator[DataSeries]:
    """Stream fixed-length float32 records back as DataSeries.

    Ids and timestamps continue from `start_id` in arrival order.  A trailing
    partial record raises LengthMismatch.
    """
    record_bytes = 4 * length
    i = start_id
    with open(path, "rb") as fh:
        while True:
            chunk = fh.read(record_bytes)
            if not chunk:
                break
            if len(chunk) != record_bytes:
                raise LengthMismatch(
                    f"trailing {len(chunk)} bytes is not a whole record of {record_bytes}"
                )
            values = np.frombuffer(chunk, dtype="<f4").astype(np.float64)
            yield DataSeries(id=i, values=values, timestamp=i)
            i += 1


def read_csv_dataset(path, start_id: int = 0) -> Iterator[DataSeries]:
    """Stream a CSV file with one comma-separated series per line."""
    i = start_id
    with open(path, "r", newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            values = np.array([float(v) for v in row], dtype=np.float64)
            yield DataSeries(id=i, values=values, timestamp=i)
            i += 1


def read_dataset(path, length: int | None = None, fmt: str | None = None) -> Iterator[DataSeries]:
    """Open either supported dataset format.

    fmt is "bin" or "csv"; when omitted it is inferred from the extension
    (.csv means CSV, anything else is binary and requires `length`).
    """
    if fmt is None:
        fmt = "csv" if str(path).endswith(".csv") else "bin"
    if fmt == "csv":
        return read_csv_dataset(path)
    if length is None:
        raise ValueError("binary datasets need an out-of-band record length")
    return read_binary_dataset(path, length)
