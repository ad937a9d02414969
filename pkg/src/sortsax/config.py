"""Shared engine configuration: series length, key shape, page geometry."""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path

DEFAULT_LENGTH = 256
DEFAULT_SEGMENTS = 16
DEFAULT_BITS = 8
DEFAULT_PAGE_SIZE = 64 * 1024
DEFAULT_GROWTH_FACTOR = 3
DEFAULT_FILL_FACTOR = 1.0


@dataclass(frozen=True)
class IndexConfig:
    """Immutable shape of one index: series length n, key layout, page size."""

    n: int = DEFAULT_LENGTH
    w: int = DEFAULT_SEGMENTS
    b: int = DEFAULT_BITS
    page_size: int = DEFAULT_PAGE_SIZE
    materialized: bool = False

    def __post_init__(self) -> None:
        if self.n <= 0 or self.w <= 0 or self.n % self.w != 0:
            raise ValueError(f"segment count {self.w} must divide series length {self.n}")

    @property
    def key_width(self) -> int:
        return self.w * self.b

    @property
    def entry_size(self) -> int:
        """On-disk bytes per index entry (16B key + 3 u64 fields [+ payload])."""
        base = 16 + 8 * 3
        return base + (8 * self.n if self.materialized else 0)

    @property
    def raw_record_size(self) -> int:
        """Bytes per raw-file record: id, timestamp, n float64 values."""
        return 16 + 8 * self.n

    @property
    def entries_per_page(self) -> int:
        return max(1, self.page_size // self.entry_size)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "IndexConfig":
        return cls(**data)

    def save(self, path: Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")

    @classmethod
    def load(cls, path: Path) -> "IndexConfig":
        return cls.from_json(json.loads(Path(path).read_text()))
