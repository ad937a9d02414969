import numpy as np
import pytest

from sortsax.clsm import CLSM
from sortsax.config import IndexConfig
from sortsax.ctree import CTree
from sortsax.errors import EmptyIndex, OutOfOrderTimestamp
from sortsax.instrument import OPENED_PARTITION, Recorder
from sortsax.series import euclidean_distance, random_walk_generate, znormalize
from sortsax.storage import IndexEntry

from test_ctree import brute_force, tiny_config


def fresh_lsm(tmp_path, buffer_entries=50, growth=2, config=None, **kw):
    config = config or tiny_config()
    return CLSM(tmp_path / "lsm", config,
                buffer_bytes=buffer_entries * config.entry_size,
                growth_factor=growth, create=True, **kw)


def key_entry(i, key=None, ts=None, width=32):
    return IndexEntry(key=int(key if key is not None else i) % (1 << width),
                      series_id=i, raw_offset=0,
                      timestamp=ts if ts is not None else i)


class TieringSimulator:
    """Pure-python oracle for the size-tiered policy: run counts per level."""

    def __init__(self, growth):
        self.growth = growth
        self.levels = []

    def flush(self):
        if not self.levels:
            self.levels.append(0)
        self.levels[0] += 1
        i = 0
        while i < len(self.levels):
            if self.levels[i] > self.growth:
                self.levels[i] -= self.growth
                if i + 1 == len(self.levels):
                    self.levels.append(0)
                self.levels[i + 1] += 1
            i += 1

    @property
    def per_level(self):
        return list(self.levels)


class TestBufferAndFlush:
    def test_threshold_semantics(self, tmp_path):
        config = IndexConfig(n=8, w=4, b=8, page_size=4096)
        lsm = fresh_lsm(tmp_path, buffer_entries=100, config=config)
        for i in range(100):
            lsm.insert(key_entry(i))
        assert lsm.run_count == 0
        lsm.insert(key_entry(100))
        assert lsm.run_count == 1
        assert lsm.levels[0][0].run.entry_count == 100
        assert len(lsm.buffer) == 1

    def test_flush_event_metadata(self, tmp_path):
        config = IndexConfig(n=8, w=4, b=8, page_size=4096)
        lsm = fresh_lsm(tmp_path, buffer_entries=10, config=config)
        for i in range(10):
            lsm.insert(key_entry(i, ts=i + 5))
        event = lsm.force_flush()
        assert event.entry_count == 10
        assert event.min_ts == 5 and event.max_ts == 14
        assert event.run is not None

    def test_force_flush_empty_is_noop(self, tmp_path):
        lsm = fresh_lsm(tmp_path)
        event = lsm.force_flush()
        assert event.run is None and event.entry_count == 0

    def test_flush_sequences_increase(self, tmp_path):
        config = IndexConfig(n=8, w=4, b=8, page_size=4096)
        lsm = fresh_lsm(tmp_path, buffer_entries=5, growth=10, config=config)
        seqs = []
        for i in range(25):
            lsm.insert(key_entry(i))
            if len(lsm.buffer) == 5:
                seqs.append(lsm.force_flush().sequence)
        assert seqs == sorted(seqs)
        assert len(set(seqs)) == len(seqs)


class TestCompaction:
    def test_cascade_after_four_flushes(self, tmp_path):
        config = IndexConfig(n=8, w=4, b=8, page_size=4096)
        lsm = fresh_lsm(tmp_path, buffer_entries=10, growth=2, config=config)
        rng = np.random.default_rng(1)
        for i in range(40):  # 4 flushes
            lsm.insert(key_entry(i, key=rng.integers(1 << 20)))
        lsm.force_flush()
        assert len(lsm.levels[0]) <= 2

    def test_matches_policy_simulation(self, tmp_path):
        config = IndexConfig(n=8, w=4, b=8, page_size=4096)
        growth = 3
        lsm = fresh_lsm(tmp_path, buffer_entries=10, growth=growth, config=config)
        sim = TieringSimulator(growth)
        rng = np.random.default_rng(2)
        for i in range(600):
            # the engine flushes right before the insert that would overfill
            if i >= 10 and i % 10 == 0:
                sim.flush()
            lsm.insert(key_entry(i, key=rng.integers(1 << 20)))
        got = [len(level) for level in lsm.levels]
        want = sim.per_level
        while want and want[-1] == 0:
            want.pop()
        while got and got[-1] == 0:
            got.pop()
        assert got == want

    def test_run_count_bound_holds_continuously(self, tmp_path):
        config = IndexConfig(n=8, w=4, b=8, page_size=4096)
        lsm = fresh_lsm(tmp_path, buffer_entries=20, growth=3, config=config)
        rng = np.random.default_rng(3)
        for i in range(2000):
            lsm.insert(key_entry(i, key=rng.integers(1 << 20)))
            assert lsm.run_count <= lsm.max_run_count_bound(i + 1)

    def test_level_sizes_respect_growth(self, tmp_path):
        config = IndexConfig(n=8, w=4, b=8, page_size=4096)
        buffer_entries = 10
        lsm = fresh_lsm(tmp_path, buffer_entries=buffer_entries, growth=2, config=config)
        rng = np.random.default_rng(4)
        for i in range(640):
            lsm.insert(key_entry(i, key=rng.integers(1 << 20)))
        for level_no, level in enumerate(lsm.levels):
            for lr in level:
                assert lr.run.entry_count <= buffer_entries * (2 ** level_no)

    def test_all_runs_sorted_and_nothing_lost(self, tmp_path):
        config = IndexConfig(n=8, w=4, b=8, page_size=4096)
        lsm = fresh_lsm(tmp_path, buffer_entries=25, growth=3, config=config)
        rng = np.random.default_rng(5)
        inserted = {}
        for i in range(1000):
            sid = int(rng.integers(100))  # duplicates allowed
            lsm.insert(IndexEntry(key=int(rng.integers(1 << 30)), series_id=sid,
                                  raw_offset=0, timestamp=i))
            inserted[sid] = inserted.get(sid, 0) + 1
        assert lsm.verify_runs_sorted()
        assert lsm.series_id_multiset() == inserted

    def test_force_full_merge_single_run(self, tmp_path):
        config = IndexConfig(n=8, w=4, b=8, page_size=4096)
        lsm = fresh_lsm(tmp_path, buffer_entries=10, growth=2, config=config)
        rng = np.random.default_rng(6)
        for i in range(95):
            lsm.insert(key_entry(i, key=rng.integers(1 << 20)))
        before = lsm.series_id_multiset()
        lsm.force_full_merge()
        assert lsm.run_count == 1
        assert lsm.series_id_multiset() == before
        assert lsm.verify_runs_sorted()


class TestSearch:
    def test_empty_raises(self, tmp_path):
        lsm = fresh_lsm(tmp_path)
        q = next(iter(random_walk_generate(1, lsm.config.n, seed=1)))
        with pytest.raises(EmptyIndex):
            lsm.approximate_search(q)

    def test_buffered_series_found_without_storage_reads(self, tmp_path):
        config = tiny_config()
        recorder = Recorder()
        lsm = CLSM(tmp_path / "lsm", config, buffer_bytes=1000 * config.entry_size,
                   growth_factor=2, recorder=recorder, create=True)
        series = list(random_walk_generate(50, config.n, seed=2))
        for s in series:
            lsm.insert_series(s)
        recorder.reset()
        res = lsm.approximate_search(series[13])
        assert res.series_id == 13 and res.distance < 1e-9
        snap = recorder.snapshot()
        assert snap.total_read_bytes == 0

    def test_approximate_never_beats_exact(self, tmp_path):
        config = tiny_config()
        lsm = fresh_lsm(tmp_path, buffer_entries=40, growth=2, config=config)
        for s in random_walk_generate(300, config.n, seed=3):
            lsm.insert_series(s)
        for q in random_walk_generate(20, config.n, seed=4):
            approx = lsm.approximate_search(q)
            exact = lsm.exact_search(q)
            assert approx.distance >= exact.distance - 1e-12

    @pytest.mark.parametrize("materialized", [False, True])
    def test_exact_matches_brute_force(self, tmp_path, materialized):
        config = tiny_config(materialized=materialized)
        lsm = fresh_lsm(tmp_path, buffer_entries=64, growth=3, config=config)
        series = list(random_walk_generate(400, config.n, seed=7))
        for s in series:
            lsm.insert_series(s)
        corpus = [znormalize(s) for s in series]
        for q in random_walk_generate(25, config.n, seed=8):
            want_dist, want_id = brute_force(corpus, q)
            got = lsm.exact_search(q)
            assert abs(got.distance - want_dist) < 1e-9
            assert got.series_id == want_id

    def test_all_in_buffer_equals_brute_force(self, tmp_path):
        config = tiny_config()
        lsm = fresh_lsm(tmp_path, buffer_entries=1000, config=config)
        series = list(random_walk_generate(200, config.n, seed=9))
        for s in series:
            lsm.insert_series(s)
        assert lsm.run_count == 0
        corpus = [znormalize(s) for s in series]
        for q in random_walk_generate(10, config.n, seed=10):
            want_dist, _ = brute_force(corpus, q)
            assert abs(lsm.exact_search(q).distance - want_dist) < 1e-9

    def test_results_unchanged_after_full_merge(self, tmp_path):
        config = tiny_config()
        lsm = fresh_lsm(tmp_path, buffer_entries=30, growth=2, config=config)
        for s in random_walk_generate(500, config.n, seed=11):
            lsm.insert_series(s)
        queries = list(random_walk_generate(15, config.n, seed=12))
        before = [(lsm.exact_search(q).series_id, lsm.exact_search(q).distance)
                  for q in queries]
        lsm.force_full_merge()
        after = [(lsm.exact_search(q).series_id, lsm.exact_search(q).distance)
                 for q in queries]
        assert before == after

    def test_matches_ctree_on_same_data(self, tmp_path):
        config = tiny_config()
        series = list(random_walk_generate(350, config.n, seed=13))
        lsm = fresh_lsm(tmp_path, buffer_entries=40, growth=3, config=config)
        for s in series:
            lsm.insert_series(s)
        tree = CTree.build(tmp_path / "tree", iter(series), config)
        for q in random_walk_generate(20, config.n, seed=14):
            assert abs(lsm.exact_search(q).distance
                       - tree.exact_search(q).distance) < 1e-9

    def test_approximate_probes_at_most_one_page_per_run(self, tmp_path):
        config = tiny_config()
        recorder = Recorder()
        lsm = CLSM(tmp_path / "lsm", config, buffer_bytes=40 * config.entry_size,
                   growth_factor=2, recorder=recorder, create=True)
        for s in random_walk_generate(600, config.n, seed=15):
            lsm.insert_series(s)
        run_names = {lr.run.name for lr in lsm.run_list()}
        for q in random_walk_generate(10, config.n, seed=16):
            res = lsm.approximate_search(q)
            trace = recorder.trace(res.trace_id)
            for name in run_names:
                pages = trace.pages_touched(name, kinds=(OPENED_PARTITION,))
                assert len(pages) <= 1


class TestOrderedMode:
    def test_out_of_order_rejected(self, tmp_path):
        lsm = fresh_lsm(tmp_path, ordered_timestamps=True,
                        config=IndexConfig(n=8, w=4, b=8, page_size=4096))
        lsm.insert(key_entry(0, ts=10))
        with pytest.raises(OutOfOrderTimestamp):
            lsm.insert(key_entry(1, ts=9))

    def test_unordered_mode_accepts_anything(self, tmp_path):
        lsm = fresh_lsm(tmp_path, config=IndexConfig(n=8, w=4, b=8, page_size=4096))
        lsm.insert(key_entry(0, ts=10))
        lsm.insert(key_entry(1, ts=9))
        assert len(lsm.buffer) == 2


class TestPersistence:
    def test_reopen_preserves_results(self, tmp_path):
        config = tiny_config()
        lsm = fresh_lsm(tmp_path, buffer_entries=30, growth=2, config=config)
        for s in random_walk_generate(300, config.n, seed=17):
            lsm.insert_series(s)
        lsm.force_flush()
        queries = list(random_walk_generate(5, config.n, seed=18))
        want = [lsm.exact_search(q).distance for q in queries]
        lsm.close()
        reopened = CLSM.open(tmp_path / "lsm")
        got = [reopened.exact_search(q).distance for q in queries]
        assert got == want
        assert reopened.run_count == lsm.run_count
