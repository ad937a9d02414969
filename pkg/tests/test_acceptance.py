"""Acceptance suite: one test per exit criterion, tolerances pinned inline.

Run with `pytest tests/test_acceptance.py -v`; the terminal summary prints one
pass/fail line per criterion.  The exactness workload (10k series, n=256,
w=16, b=8, 100 queries, both engines vs. brute force) must finish well inside
five minutes on commodity hardware.
"""

import itertools
import math
import time

import numpy as np
import pytest

from sortsax.clsm import CLSM
from sortsax.config import IndexConfig
from sortsax.ctree import CTree
from sortsax.instrument import OPENED_PARTITION, Recorder
from sortsax.recommend import WorkloadProfile, recommend
from sortsax.search import prepare_entry
from sortsax.series import random_walk_generate, znormalize
from sortsax.storage import (
    IndexEntry,
    MemoryBudget,
    RawSeriesFile,
    external_sort,
)
from sortsax.summarize import ISAXSummary, breakpoints, deinterleave, interleave
from sortsax.windows import btp_maintain, btp_search, pp_search, tp_flush, tp_search

SEED_CORPUS = 424242
SEED_QUERIES = 515151

EXACTNESS_CONFIG = IndexConfig(n=256, w=16, b=8)  # page 64 KiB, non-materialized


# -- shared workloads --------------------------------------------------------------


@pytest.fixture(scope="module")
def corpus_10k():
    series = list(random_walk_generate(10_000, 256, seed=SEED_CORPUS))
    matrix = np.stack([znormalize(s).values for s in series])
    queries = list(random_walk_generate(100, 256, seed=SEED_QUERIES))
    return series, matrix, queries


@pytest.fixture(scope="module")
def engines_10k(corpus_10k, tmp_path_factory):
    series, _, _ = corpus_10k
    root = tmp_path_factory.mktemp("exactness")
    tree_rec, lsm_rec = Recorder(), Recorder()
    tree = CTree.build(root / "ctree", iter(series), EXACTNESS_CONFIG,
                       recorder=tree_rec)
    lsm = CLSM(root / "clsm", EXACTNESS_CONFIG,
               buffer_bytes=1000 * EXACTNESS_CONFIG.entry_size,
               growth_factor=3, recorder=lsm_rec, create=True)
    for s in series:
        lsm.insert_series(s)
    return tree, tree_rec, lsm, lsm_rec


@pytest.fixture(scope="module")
def window_setup(tmp_path_factory):
    """1e5-entry in-order stream indexed for BTP and TP, plus oracle arrays."""
    config = IndexConfig(n=64, w=16, b=8)
    root = tmp_path_factory.mktemp("windows")
    count = 100_000
    lsm_rec, tp_rec = Recorder(), Recorder()
    lsm = CLSM(root / "btp", config, buffer_bytes=10_000 * config.entry_size,
               growth_factor=3, recorder=lsm_rec, create=True,
               ordered_timestamps=True)
    matrix = np.empty((count, config.n))
    for s in random_walk_generate(count, config.n, seed=SEED_CORPUS + 1):
        matrix[s.id] = znormalize(s).values
        lsm.insert_series(s)
        # btp invariant checked continuously at every flush boundary
        if len(lsm.buffer) == 1 and s.id >= lsm.buffer_entries:
            view = btp_maintain(lsm)
            assert view.check_disjoint_ordered()
    parts = tp_flush(random_walk_generate(count, config.n, seed=SEED_CORPUS + 1),
                     10_000, root / "tp", config, recorder=tp_rec)
    timestamps = np.arange(count)
    rng = np.random.default_rng(SEED_QUERIES + 1)
    windows = []
    for _ in range(1000):
        a, b = sorted(int(x) for x in rng.integers(0, count, size=2))
        windows.append((a, b))
    queries = list(random_walk_generate(1000, config.n, seed=SEED_QUERIES + 2))
    return config, lsm, lsm_rec, parts, tp_rec, matrix, timestamps, queries, windows


# -- criteria -------------------------------------------------------------------------


def test_exactness_vs_bruteforce_10k_100q(corpus_10k, engines_10k):
    """CTree and CLSM exact search equal brute force on all 100 queries."""
    _, matrix, queries = corpus_10k
    tree, _, lsm, _ = engines_10k
    started = time.monotonic()
    failures = 0
    for q in queries:
        qv = znormalize(q).values
        brute = float(np.sqrt(((matrix - qv) ** 2).sum(axis=1)).min())
        tree_d = tree.exact_search(q).distance
        lsm_d = lsm.exact_search(q).distance
        if abs(tree_d - brute) > 1e-9 or abs(lsm_d - brute) > 1e-9:
            failures += 1
    elapsed = time.monotonic() - started
    assert failures == 0, f"{failures}/100 queries diverged from brute force"
    assert elapsed < 300, f"exactness workload took {elapsed:.1f}s"


def test_lower_bound_soundness_100k_pairs():
    """LB <= true distance + 1e-9 on 1e5 random pairs, zero violations."""
    n, w, b = 64, 16, 8
    table = breakpoints(b)
    lo_tab, hi_tab = table.bounds_arrays()
    violations = 0
    pair_count = 0
    for chunk in range(10):
        qs = np.stack([znormalize(s).values for s in
                       random_walk_generate(10_000, n, seed=1000 + chunk)])
        xs = np.stack([znormalize(s).values for s in
                       random_walk_generate(10_000, n, seed=2000 + chunk)])
        q_means = qs.reshape(-1, w, n // w).mean(axis=2)
        x_means = xs.reshape(-1, w, n // w).mean(axis=2)
        symbols = np.searchsorted(table.cuts, x_means.ravel(),
                                  side="right").reshape(-1, w)
        lo = lo_tab[symbols]
        hi = hi_tab[symbols]
        gap = np.clip(lo - q_means, 0, None) + np.clip(q_means - hi, 0, None)
        lb = np.sqrt((n / w) * (gap * gap).sum(axis=1))
        true = np.sqrt(((qs - xs) ** 2).sum(axis=1))
        violations += int((lb > true + 1e-9).sum())
        pair_count += len(lb)
    assert pair_count == 100_000
    assert violations == 0


def test_interleave_round_trip_and_key_order_exhaustive():
    """deinterleave(interleave(x)) = x for all w<=4, b<=4; byte order = int order."""
    for w, b in itertools.product(range(1, 5), range(1, 5)):
        keys = []
        for combo in itertools.product(range(1 << b), repeat=w):
            summary = ISAXSummary(symbols=combo, w=w, b=b)
            key = interleave(summary)
            assert deinterleave(key, w, b).symbols == combo
            keys.append(key)
        by_value = sorted(keys, key=lambda k: k.value)
        by_bytes = sorted(keys, key=lambda k: k.to_bytes())
        assert by_value == by_bytes


def test_two_pass_construction_at_8x_budget(tmp_path):
    """External sort over data 8x the budget: read_passes = 2, no random reads."""
    config = EXACTNESS_CONFIG
    recorder = Recorder()
    raw = RawSeriesFile(tmp_path / "raw.bin", config.n, recorder, create=True)
    entries = []
    for s in random_walk_generate(10_000, config.n, seed=SEED_CORPUS + 9):
        entry, _ = prepare_entry(s, config, raw)
        entries.append(entry)
    data_bytes = len(entries) * config.entry_size
    budget = MemoryBudget(bytes=data_bytes // 8)
    recorder.reset()
    run = external_sort(iter(entries), budget, tmp_path / "sorted.run", config,
                        recorder, tmp_dir=tmp_path / "tmp")
    snap = recorder.snapshot()
    assert snap.read_passes == 2
    assert snap.rand_read_bytes == 0
    # and the rest of the build (leaf packing) stays sequential too
    tree = CTree.bulk_load(run, 1.0, tmp_path / "tree", recorder)
    assert recorder.snapshot().rand_read_bytes == 0
    assert tree.entry_count == 10_000


def test_bulk_load_beats_incremental_on_random_reads(corpus_10k, tmp_path):
    """Bulk build uses strictly fewer random-read bytes than insert-at-a-time."""
    series, _, _ = corpus_10k
    bulk_rec = Recorder()
    CTree.build(tmp_path / "bulk", iter(series), EXACTNESS_CONFIG, recorder=bulk_rec)
    bulk_rand = bulk_rec.snapshot().rand_read_bytes

    incr_rec = Recorder()
    tree = CTree.build(tmp_path / "incr", iter(series[:1000]), EXACTNESS_CONFIG,
                       recorder=incr_rec)
    for s in series[1000:]:
        tree.insert_series(s)
    incr_rand = incr_rec.snapshot().rand_read_bytes
    assert bulk_rand < incr_rand


def test_lsm_structure_under_1m_inserts(tmp_path):
    """1e6 inserts, T=3, 1e4-entry buffer: run count bounded, every run sorted."""
    config = IndexConfig(n=8, w=4, b=8, page_size=65536)
    growth = 3
    buffer_entries = 10_000
    lsm = CLSM(tmp_path / "stress", config,
               buffer_bytes=buffer_entries * config.entry_size,
               growth_factor=growth, create=True)
    bound = growth * math.ceil(math.log(100) / math.log(growth)) + 1  # = 16
    rng = np.random.default_rng(777)
    keys = rng.integers(0, 1 << 32, size=1_000_000, dtype=np.uint64)
    worst = 0
    for i in range(1_000_000):
        lsm.insert(IndexEntry(key=int(keys[i]), series_id=i, raw_offset=0,
                              timestamp=i))
        count = lsm.run_count
        if count > worst:
            worst = count
            assert count <= bound, f"run count {count} exceeded bound {bound} at {i}"
    assert worst <= bound
    assert lsm.verify_runs_sorted()
    assert lsm.entry_count == 1_000_000


def test_window_strategy_equivalence_1000_windows(window_setup):
    """pp/tp/btp nearest distances match the windowed linear scan, always;
    TP and BTP never open a partition disjoint from the window."""
    (config, lsm, lsm_rec, parts, tp_rec, matrix, timestamps, queries,
     windows) = window_setup
    tp_ranges = {p.name: (p.min_ts, p.max_ts) for p in parts.partitions}
    btp_ranges = {lr.run.name: (lr.run.min_ts, lr.run.max_ts)
                  for lr in lsm.run_list()}
    mismatches = 0
    for q, win in zip(queries, windows):
        qv = znormalize(q).values
        dists = np.sqrt(((matrix - qv) ** 2).sum(axis=1))
        mask = (timestamps >= win[0]) & (timestamps <= win[1])
        oracle = float(dists[mask].min())

        a = pp_search(lsm, q, win).distance
        b_res = tp_search(parts, q, win)
        c_res = btp_search(lsm, q, win)
        if not (a == b_res.distance == c_res.distance):
            mismatches += 1
        if abs(a - oracle) > 1e-9:
            mismatches += 1

        for res, recorder, ranges in ((b_res, tp_rec, tp_ranges),
                                      (c_res, lsm_rec, btp_ranges)):
            trace = recorder.trace(res.trace_id)
            for e in trace.events:
                if e.kind == OPENED_PARTITION and e.file in ranges:
                    lo, hi = ranges[e.file]
                    assert hi >= win[0] and lo <= win[1], (
                        f"opened partition {e.file} disjoint from window {win}"
                    )
    assert mismatches == 0


def test_btp_invariants_after_sustained_ingestion(window_setup):
    """Run time ranges pairwise disjoint and ordered; oldest data in largest run."""
    _, lsm, *_ = window_setup
    view = btp_maintain(lsm)
    assert len(view.partitions) >= 2
    assert view.check_disjoint_ordered()
    assert view.check_oldest_in_largest()
    sizes = [p.entry_count for p in view.partitions]
    assert sizes[0] == max(sizes)
    oldest = min(p.min_ts for p in view.partitions)
    largest = max(view.partitions, key=lambda p: p.entry_count)
    assert largest.min_ts == oldest


def test_recommender_paper_scenarios():
    """The three grounded outcomes, verbatim, each with a non-empty rationale."""
    static_low = recommend(WorkloadProfile(
        mode="static", dataset_bytes=1 << 30, memory_budget_bytes=256 << 20,
        expected_query_count=10, update_rate=0.0, window_profile="none"))
    assert (static_low.index, static_low.materialized, static_low.strategy) == \
        ("CTree", False, "PP")
    assert len(static_low.rationale) > 0

    static_high = recommend(WorkloadProfile(
        mode="static", dataset_bytes=1 << 30, memory_budget_bytes=256 << 20,
        expected_query_count=1_000_000, update_rate=0.0, window_profile="none"))
    assert (static_high.index, static_high.materialized, static_high.strategy) == \
        ("CTree", True, "PP")
    assert len(static_high.rationale) > 0

    streaming = recommend(WorkloadProfile(
        mode="streaming", dataset_bytes=1 << 30, memory_budget_bytes=256 << 20,
        expected_query_count=100, update_rate=500.0, window_profile="mixed"))
    assert (streaming.index, streaming.materialized, streaming.strategy) == \
        ("CLSM", False, "BTP")
    assert len(streaming.rationale) > 0


def test_approximate_locality_traces(corpus_10k, engines_10k):
    """Approximate queries: exactly one leaf (CTree); <= 1 page per run (CLSM)."""
    _, _, queries = corpus_10k
    tree, tree_rec, lsm, lsm_rec = engines_10k
    leaf_file = tree.leaves.file.name
    run_names = {lr.run.name for lr in lsm.run_list()}
    for q in queries:
        res = tree.approximate_search(q)
        trace = tree_rec.trace(res.trace_id)
        opened = [e for e in trace.events
                  if e.file == leaf_file and e.kind == OPENED_PARTITION]
        assert len(opened) == 1

        res = lsm.approximate_search(q)
        trace = lsm_rec.trace(res.trace_id)
        for name in run_names:
            pages = trace.pages_touched(name, kinds=(OPENED_PARTITION,))
            assert len(pages) <= 1
