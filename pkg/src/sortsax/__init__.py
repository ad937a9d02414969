"""Data-series similarity search over sortable bit-interleaved summarizations.

Series are z-normalized, reduced to segment means, quantized against
standard-normal breakpoints, and interleaved MSB-first into single sortable
keys.  Sorting those keys groups similar series, which lets ordinary
sort-based storage structures (a bulk-loaded page tree, a log-structured run
hierarchy) serve exact and approximate nearest-neighbor queries with mostly
sequential I/O, including queries constrained to temporal windows.
"""

from .clsm import CLSM, FlushEvent
from .config import IndexConfig
from .ctree import CTree
from .errors import SortsaxError
from .instrument import AccessTrace, IOCounters, NullRecorder, Recorder
from .recommend import Recommendation, WorkloadProfile, recommend
from .search import SearchResult
from .series import (
    DataSeries,
    PAAVector,
    euclidean_distance,
    paa,
    random_walk_generate,
    znormalize,
)
from .storage import IndexEntry, MemoryBudget, SortedRun, external_sort, merge_runs, scan
from .summarize import (
    BreakpointTable,
    ISAXSummary,
    SortableKey,
    breakpoints,
    deinterleave,
    interleave,
    lower_bound_distance,
    summarize,
)
from .windows import (
    TemporalPartitions,
    TimeWindow,
    btp_maintain,
    btp_search,
    pp_search,
    tp_flush,
    tp_search,
)

__version__ = "0.1.0"

__all__ = [
    "CLSM",
    "CTree",
    "AccessTrace",
    "BreakpointTable",
    "DataSeries",
    "FlushEvent",
    "IOCounters",
    "ISAXSummary",
    "IndexConfig",
    "IndexEntry",
    "MemoryBudget",
    "NullRecorder",
    "PAAVector",
    "Recommendation",
    "Recorder",
    "SearchResult",
    "SortableKey",
    "SortedRun",
    "SortsaxError",
    "TemporalPartitions",
    "TimeWindow",
    "WorkloadProfile",
    "breakpoints",
    "btp_maintain",
    "btp_search",
    "deinterleave",
    "euclidean_distance",
    "external_sort",
    "interleave",
    "lower_bound_distance",
    "merge_runs",
    "paa",
    "pp_search",
    "random_walk_generate",
    "recommend",
    "scan",
    "summarize",
    "tp_flush",
    "tp_search",
    "znormalize",
    "__version__",
]
