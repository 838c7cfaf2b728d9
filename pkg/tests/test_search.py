import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmindex.keyset import KeySet
from rmindex.search import (
    SEARCH_SPECS,
    SearchAlgo,
    binary_search,
    binary_search_batch,
    model_biased_binary,
    model_biased_binary_batch,
    model_biased_exponential,
    model_biased_exponential_batch,
    model_biased_exponential_probes,
    model_biased_linear,
    model_biased_linear_batch,
)

from reference_impl import linear_scan_lower_bound


class CountingArray(np.ndarray):
    """ndarray view that counts element reads, for probe accounting."""

    reads = 0

    def __getitem__(self, item):
        CountingArray.reads += 1
        return super().__getitem__(item)


def counted_keyset(values) -> KeySet:
    ks = KeySet(np.array(values, dtype=np.uint64))
    counted = ks.keys.view(CountingArray)
    object.__setattr__(ks, "keys", counted)
    return ks


def ks_of(values) -> KeySet:
    return KeySet(np.array(values, dtype=np.uint64))


class TestBinarySearch:
    def test_present(self):
        assert binary_search(ks_of([10, 20, 30, 40]), 30, 0, 4) == 2

    def test_absent(self):
        assert binary_search(ks_of([10, 20, 30, 40]), 25, 0, 4) == 2

    def test_window_restricts(self):
        ks = ks_of([10, 20, 30, 40])
        assert binary_search(ks, 5, 2, 4) == 2
        assert binary_search(ks, 99, 1, 3) == 3

    def test_bad_window(self):
        with pytest.raises(ValueError):
            binary_search(ks_of([1, 2]), 1, 0, 3)

    def test_randomized_window_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            n = int(rng.integers(1, 60))
            keys = np.sort(rng.integers(0, 40, n).astype(np.uint64))
            ks = ks_of(keys)
            q = int(rng.integers(0, 42))
            truth = linear_scan_lower_bound(keys, q)
            lo = int(rng.integers(0, truth + 1))
            hi = int(rng.integers(truth, n + 1))
            assert binary_search(ks, q, lo, hi) == truth


class TestModelBiasedBinary:
    def test_exact_estimate_narrows_immediately(self):
        ks = counted_keyset(range(0, 2000, 2))
        CountingArray.reads = 0
        assert model_biased_binary(ks, 1000, 0, 1000, 500) == 500
        first_window_reads = CountingArray.reads
        # with the answer probed first, the remaining window is one side only;
        # far fewer reads than log2(1000) would not hold for a bad estimate
        assert first_window_reads <= 11

    def test_worst_case_bias(self):
        ks = ks_of(range(100))
        assert model_biased_binary(ks, 99, 0, 100, 0) == 99

    def test_estimate_clamped_inward(self):
        ks = ks_of([10, 20, 30])
        assert model_biased_binary(ks, 30, 0, 3, 99) == 2
        assert model_biased_binary(ks, 10, 0, 3, -5) == 0

    def test_randomized_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(300):
            n = int(rng.integers(1, 60))
            keys = np.sort(rng.integers(0, 40, n).astype(np.uint64))
            ks = ks_of(keys)
            q = int(rng.integers(0, 42))
            truth = linear_scan_lower_bound(keys, q)
            lo = int(rng.integers(0, truth + 1))
            hi = int(rng.integers(truth, n + 1))
            est = int(rng.integers(0, n))
            assert model_biased_binary(ks, q, lo, hi, est) == truth


class TestModelBiasedLinear:
    def test_exact_estimate(self):
        ks = ks_of([10, 20, 30, 40])
        assert model_biased_linear(ks, 30, 2) == 2

    def test_small_offsets_probe_budget(self):
        ks = counted_keyset(range(0, 200, 2))
        for true_pos, offset in [(50, 3), (50, -3)]:
            est = true_pos + offset
            CountingArray.reads = 0
            assert model_biased_linear(ks, 100, est) == 50
            assert CountingArray.reads <= 4 + 1

    def test_beyond_last_key(self):
        ks = ks_of([10, 20, 30])
        assert model_biased_linear(ks, 99, 2) == 3

    def test_duplicates_first_occurrence(self):
        ks = ks_of([5, 7, 7, 7, 9])
        for est in range(5):
            assert model_biased_linear(ks, 7, est) == 1


class TestModelBiasedExponential:
    def test_exact_estimate_probe_count(self):
        ks = ks_of(range(0, 200, 2))
        pos, probes = model_biased_exponential_probes(ks, 100, 50)
        assert pos == 50 and probes <= 2

    def test_probe_bound_randomized(self):
        rng = np.random.default_rng(6)
        keys = np.sort(rng.integers(0, 10**9, 5000).astype(np.uint64))
        ks = ks_of(keys)
        for _ in range(2000):
            q = int(rng.integers(0, 10**9))
            truth = int(np.searchsorted(keys, q))
            est = int(rng.integers(0, 5000))
            pos, probes = model_biased_exponential_probes(ks, q, est)
            assert pos == truth
            dist = max(1, abs(est - truth))
            assert probes <= 2 * (int(np.log2(dist)) + 2)

    def test_beyond_edges(self):
        ks = ks_of([10, 20, 30])
        assert model_biased_exponential(ks, 5, 2) == 0
        assert model_biased_exponential(ks, 99, 0) == 3


def sorted_arrays_upto(alphabet: int, max_len: int):
    for length in range(1, max_len + 1):
        for combo in itertools.combinations_with_replacement(range(alphabet), length):
            yield np.array(combo, dtype=np.uint64)


class TestExhaustiveEquivalence:
    def test_all_algorithms_small_arrays(self):
        # every sorted multiset over {0..5} up to length 5, every query,
        # every estimate, and for bounded searches every window that
        # contains the answer's insertion point
        for keys in sorted_arrays_upto(6, 5):
            ks = ks_of(keys)
            n = len(keys)
            for q in range(0, 7):
                truth = linear_scan_lower_bound(keys, q)
                for est in range(n):
                    assert model_biased_linear(ks, q, est) == truth
                    assert model_biased_exponential(ks, q, est) == truth
                    for lo in range(0, truth + 1):
                        for hi in range(truth, n + 1):
                            if lo > hi:
                                continue
                            assert binary_search(ks, q, lo, hi) == truth
                            assert model_biased_binary(ks, q, lo, hi, est) == truth


class TestBatchVariants:
    @settings(max_examples=50, deadline=None)
    @given(data=st.data())
    def test_batch_matches_scalar(self, data):
        keys = np.sort(
            np.array(
                data.draw(st.lists(st.integers(0, 100), min_size=1, max_size=80)), dtype=np.uint64
            )
        )
        ks = ks_of(keys)
        n = len(keys)
        m = 32
        rng = np.random.default_rng(data.draw(st.integers(0, 2**31)))
        q = rng.integers(0, 102, m).astype(np.uint64)
        est = rng.integers(0, n, m)
        truth = np.array([linear_scan_lower_bound(keys, int(x)) for x in q])
        lo = np.array([int(rng.integers(0, t + 1)) for t in truth])
        hi = np.array([int(rng.integers(t, n + 1)) for t in truth])
        assert np.array_equal(binary_search_batch(keys, q, lo, hi), truth)
        assert np.array_equal(model_biased_binary_batch(keys, q, lo, hi, est), truth)
        assert np.array_equal(model_biased_linear_batch(keys, q, est), truth)
        assert np.array_equal(model_biased_exponential_batch(keys, q, est), truth)

    def test_batch_larger_randomized(self):
        rng = np.random.default_rng(12)
        keys = np.sort(rng.integers(0, 10**12, 50_000).astype(np.uint64))
        q = rng.integers(0, 10**12, 10_000).astype(np.uint64)
        truth = np.searchsorted(keys, q)
        est = np.clip(truth + rng.integers(-2000, 2000, q.size), 0, keys.size - 1)
        assert np.array_equal(model_biased_exponential_batch(keys, q, est), truth)
        assert np.array_equal(model_biased_linear_batch(keys, q, est), truth)
        lo = np.maximum(truth - rng.integers(0, 3000, q.size), 0)
        hi = np.minimum(truth + rng.integers(1, 3000, q.size), keys.size)
        assert np.array_equal(binary_search_batch(keys, q, lo, hi), truth)
        assert np.array_equal(model_biased_binary_batch(keys, q, lo, hi, est), truth)


def test_specs_mark_bound_requirements():
    assert SEARCH_SPECS[SearchAlgo.BIN].requires_bounds
    assert SEARCH_SPECS[SearchAlgo.MBIN].requires_bounds
    assert not SEARCH_SPECS[SearchAlgo.MLIN].requires_bounds
    assert not SEARCH_SPECS[SearchAlgo.MEXP].requires_bounds
