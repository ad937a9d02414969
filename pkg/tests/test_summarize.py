import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from sortsax.errors import BitsOutOfRange, SegmentCountMismatch, WidthMismatch
from sortsax.series import paa, znormalize
from sortsax.summarize import (
    ISAXSummary,
    SortableKey,
    breakpoints,
    deinterleave,
    interleave,
    interleave_value,
    keys_to_symbols,
    lower_bound_batch,
    lower_bound_distance,
    summarize,
    summarize_paa,
)

from conftest import make_series, normalized_walks


def bisect_ppf(p):
    """Independent inverse-CDF oracle: bisection over math.erf."""
    lo, hi = -10.0, 10.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if 0.5 * (1 + math.erf(mid / math.sqrt(2))) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestBreakpoints:
    def test_b1_is_median(self):
        assert np.allclose(breakpoints(1).cuts, [0.0], atol=1e-9)

    def test_b2_values(self):
        assert np.allclose(breakpoints(2).cuts, [-0.6745, 0.0, 0.6745], atol=1e-3)

    @pytest.mark.parametrize("b", [1, 2, 3, 4, 8])
    def test_matches_scipy_quantiles(self, b):
        card = 1 << b
        expect = norm.ppf([(i + 1) / card for i in range(card - 1)])
        assert np.allclose(breakpoints(b).cuts, expect, atol=1e-9)

    @pytest.mark.parametrize("b", [2, 3, 5])
    def test_matches_bisection_oracle(self, b):
        card = 1 << b
        expect = [bisect_ppf((i + 1) / card) for i in range(card - 1)]
        assert np.allclose(breakpoints(b).cuts, expect, atol=1e-9)

    @pytest.mark.parametrize("b", [1, 2, 4, 8])
    def test_symmetric_about_zero(self, b):
        cuts = breakpoints(b).cuts
        assert np.allclose(cuts, -cuts[::-1], atol=1e-9)

    def test_strictly_increasing(self):
        cuts = breakpoints(8).cuts
        assert np.all(np.diff(cuts) > 0)

    @pytest.mark.parametrize("b", [0, 17, -3])
    def test_rejects_bad_bits(self, b):
        with pytest.raises(BitsOutOfRange):
            breakpoints(b)


class TestSummarize:
    def test_all_zero_series_hits_boundary_rule(self):
        # cuts for b=2 are [-0.6745, 0, 0.6745]; two cuts are <= 0, so the
        # symbol containing 0 is interval 2
        s = make_series([0.0] * 8)
        out = summarize(s, w=4, b=2)
        assert out.symbols == (2, 2, 2, 2)

    def test_extreme_low_and_high(self):
        out = summarize_paa(np.array([-50.0, 50.0]), b=3)
        assert out.symbols == (0, 7)

    def test_symbols_index_intervals(self):
        table = breakpoints(2)
        # one value per interval
        vals = np.array([-1.0, -0.3, 0.3, 1.0])
        out = summarize_paa(vals, b=2)
        assert out.symbols == (0, 1, 2, 3)
        for sym, v in zip(out.symbols, vals):
            lo, hi = table.interval(sym)
            assert lo <= v <= hi


class TestInterleave:
    def test_forced_example(self):
        key = interleave(ISAXSummary(symbols=(0b10, 0b01), w=2, b=2))
        assert key.value == 0b1001 == 9
        assert key.width == 4

    def test_zero_symbols(self):
        key = interleave(ISAXSummary(symbols=(0, 0, 0), w=3, b=4))
        assert key.value == 0

    def test_single_segment_identity(self):
        key = interleave(ISAXSummary(symbols=(0b1011,), w=1, b=4))
        assert key.value == 0b1011

    def test_deinterleave_inverse_of_example(self):
        out = deinterleave(SortableKey(value=0b1001, width=4), w=2, b=2)
        assert out.symbols == (0b10, 0b01)

    def test_all_ones_key(self):
        out = deinterleave(SortableKey(value=0xFFF, width=12), w=3, b=4)
        assert out.symbols == (0xF, 0xF, 0xF)

    def test_round_trip_exhaustive_small(self):
        for w, b in itertools.product(range(1, 5), range(1, 5)):
            for combo in itertools.product(range(1 << b), repeat=w):
                summary = ISAXSummary(symbols=combo, w=w, b=b)
                assert deinterleave(interleave(summary), w, b).symbols == combo

    def test_width_mismatch(self):
        with pytest.raises(WidthMismatch):
            deinterleave(SortableKey(value=1, width=4), w=3, b=2)

    @given(st.integers(1, 8), st.integers(1, 8), st.data())
    @settings(max_examples=200, deadline=None)
    def test_round_trip_random(self, w, b, data):
        symbols = tuple(
            data.draw(st.integers(0, (1 << b) - 1)) for _ in range(w)
        )
        summary = ISAXSummary(symbols=symbols, w=w, b=b)
        assert deinterleave(interleave(summary), w, b).symbols == symbols

    def test_sort_order_groups_shared_prefixes(self):
        # keys agreeing on the first p bits of every segment share a prefix of
        # at least w*p interleaved bits
        w, b = 3, 3
        for s1 in itertools.product(range(1 << b), repeat=w):
            k1 = interleave_value(s1, w, b)
            for p in range(b + 1):
                mask = ((1 << b) - 1) ^ ((1 << (b - p)) - 1)
                s2 = tuple(sym & mask | (~sym & ((1 << (b - p)) - 1)) for sym in s1)
                k2 = interleave_value(s2, w, b)
                common = w * b - (k1 ^ k2).bit_length() if k1 != k2 else w * b
                assert common >= w * p

    def test_monotone_refinement(self):
        # truncating the key to w*b' bits equals interleaving truncated symbols
        w, b, b_prime = 4, 4, 2
        for combo in itertools.islice(itertools.product(range(16), repeat=4), 300):
            full = interleave_value(combo, w, b)
            truncated_key = full >> (w * (b - b_prime))
            truncated_syms = tuple(s >> (b - b_prime) for s in combo)
            assert truncated_key == interleave_value(truncated_syms, w, b_prime)


class TestKeyBytes:
    def test_lexicographic_equals_integer_order(self):
        w, b = 2, 4
        keys = []
        for combo in itertools.product(range(16), repeat=2):
            keys.append(interleave(ISAXSummary(symbols=combo, w=w, b=b)))
        by_int = sorted(keys, key=lambda k: k.value)
        by_bytes = sorted(keys, key=lambda k: k.to_bytes())
        assert by_int == by_bytes

    def test_round_trip_bytes(self):
        key = SortableKey(value=0xABC, width=12)
        assert SortableKey.from_bytes(key.to_bytes(), 12) == key

    def test_batch_decode_matches_scalar(self, rng):
        w, b = 16, 8
        mat = rng.integers(0, 256, size=(50, w), dtype=np.int64)
        rows = []
        for syms in mat:
            key = interleave(ISAXSummary(symbols=tuple(int(x) for x in syms), w=w, b=b))
            rows.append(np.frombuffer(key.to_bytes(), dtype=np.uint8))
        decoded = keys_to_symbols(np.stack(rows), w, b)
        assert np.array_equal(decoded, mat)


class TestLowerBound:
    def test_query_inside_every_interval_gives_zero(self):
        table = breakpoints(2)
        means = np.array([-1.0, -0.3, 0.3, 1.0])
        summary = summarize_paa(means, b=2)
        q = paa(make_series(np.repeat(means, 2)), 4)
        assert lower_bound_distance(q, summary, table) == 0.0

    def test_self_summary_gives_zero(self, rng):
        s = znormalize(make_series(rng.normal(size=64)))
        summary = summarize(s, w=8, b=4)
        assert lower_bound_distance(paa(s, 8), summary, breakpoints(4)) == 0.0

    def test_segment_count_mismatch(self):
        q = paa(make_series([0.0] * 8), 4)
        summary = ISAXSummary(symbols=(0, 1), w=2, b=2)
        with pytest.raises(SegmentCountMismatch):
            lower_bound_distance(q, summary, breakpoints(2))

    def test_sound_on_random_pairs(self):
        # oracle: true Euclidean distance, vectorized
        n, w, b = 64, 16, 8
        table = breakpoints(b)
        lo_tab, hi_tab = table.bounds_arrays()
        queries = normalized_walks(200, n, seed=5)
        targets = normalized_walks(200, n, seed=6)
        tmat = np.stack([t.values for t in targets])
        symbols = np.stack([summarize(t, w, b).symbols for t in targets])
        for q in queries[:50]:
            qp = paa(q, w)
            lbs = lower_bound_batch(qp.means, symbols, lo_tab, hi_tab, n)
            true = np.sqrt(((tmat - q.values) ** 2).sum(axis=1))
            assert np.all(lbs <= true + 1e-9)

    def test_scalar_matches_batch(self, rng):
        n, w, b = 32, 8, 3
        table = breakpoints(b)
        lo_tab, hi_tab = table.bounds_arrays()
        q = znormalize(make_series(rng.normal(size=n)))
        t = znormalize(make_series(rng.normal(size=n)))
        summary = summarize(t, w, b)
        scalar = lower_bound_distance(paa(q, w), summary, table)
        batch = lower_bound_batch(
            paa(q, w).means, np.array([summary.symbols]), lo_tab, hi_tab, n
        )[0]
        assert abs(scalar - batch) < 1e-12
