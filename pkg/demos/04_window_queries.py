"""Temporal windows three ways: post-processing, temporal partitions, bounded
temporal partitions.

All three return the same nearest neighbor; the traces differ: TP and BTP skip
partitions disjoint from the window, and BTP keeps the partition count bounded
by merging time-adjacent runs.

Run: python demos/04_window_queries.py
"""

import tempfile
from pathlib import Path

from sortsax import (
    CLSM,
    IndexConfig,
    Recorder,
    btp_maintain,
    btp_search,
    pp_search,
    random_walk_generate,
    tp_flush,
    tp_search,
)

N, COUNT, BUFFER = 64, 30_000, 2_000
config = IndexConfig(n=N, w=16, b=8)
work = Path(tempfile.mkdtemp(prefix="sortsax-demo-"))

btp_rec, tp_rec = Recorder(), Recorder()
lsm = CLSM(work / "btp", config, buffer_bytes=BUFFER * config.entry_size,
           growth_factor=3, recorder=btp_rec, create=True, ordered_timestamps=True)
for s in random_walk_generate(COUNT, N, seed=31):
    lsm.insert_series(s)
parts = tp_flush(random_walk_generate(COUNT, N, seed=31), BUFFER,
                 work / "tp", config, recorder=tp_rec)

view = btp_maintain(lsm)
print(f"TP kept {len(parts.partitions)} partitions; "
      f"BTP merged down to {len(view.partitions)}:")
for p in view.partitions:
    print(f"  {p.name}: {p.entry_count:6d} entries, ts [{p.min_ts}, {p.max_ts}]")

query = next(iter(random_walk_generate(1, N, seed=32)))
for window in [(COUNT - 2000, COUNT - 1), (0, COUNT - 1), (5000, 6000)]:
    a = pp_search(lsm, query, window)
    b = tp_search(parts, query, window)
    c = btp_search(lsm, query, window)
    assert a.distance == b.distance == c.distance
    tp_trace = tp_rec.trace(b.trace_id)
    btp_trace = btp_rec.trace(c.trace_id)
    tp_skipped = sum(1 for e in tp_trace.events if e.kind == "skipped_partition")
    btp_skipped = sum(1 for e in btp_trace.events if e.kind == "skipped_partition")
    print(f"window {window}: nn={a.distance:.4f} (all strategies equal)  "
          f"TP skipped {tp_skipped}/{len(parts.partitions)} partitions, "
          f"BTP skipped {btp_skipped}/{len(view.partitions)}")
