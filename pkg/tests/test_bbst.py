import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockrmq.bbst import BbstIndex, bbst_space_bits
from blockrmq.core import (
    ParameterError,
    QueryBatch,
    RangeError,
    count_mismatches,
    generate_array,
    generate_fixed_width_queries,
    generate_queries,
)

from conftest import all_pairs, brute_min


def test_layer_zero_holds_block_minima(fixture_array):
    idx = BbstIndex(fixture_array, 4)
    assert idx.n_blocks == 4 and idx.n_layers == 2
    expected = [brute_min(fixture_array, 4 * b, 4 * b + 3) for b in range(4)]
    assert [idx.span_entry(b, 0)[1] for b in range(4)] == expected == [1, 2, 3, 3]
    assert idx.span_entry(1, 1) == (6, 2)


def test_every_entry_is_its_span_minimum():
    a = np.random.default_rng(0).integers(0, 30, 1000).astype(np.uint32)
    for k in (1, 3, 7, 64, 1000):
        idx = BbstIndex(a, k)
        for j in range(idx.n_layers):
            for i in range(idx.n_blocks):
                pos, val = idx.span_entry(i, j)
                hi = min((i + 2**j) * k, 1000) - 1
                assert a[pos] == val == brute_min(a, i * k, hi)


def test_single_block(fixture_array):
    idx = BbstIndex(fixture_array, 16)
    assert idx.n_blocks == 1 and idx.n_layers == 1
    assert idx.span_entry(0, 0) == (1, 1)


def test_fixture_queries(fixture_array):
    idx = BbstIndex(fixture_array, 4)
    assert idx._query(fixture_array, 4, 11)[:2] == (6, False)
    assert idx._query(fixture_array, 7, 10)[:2] == (9, True)
    assert idx.try_query(4, 11) == 6
    assert idx.try_query(7, 10) is None
    assert idx.try_query(0, 15) is not None
    for l in range(16):
        assert idx.query(fixture_array, l, l) == l


def test_errors(fixture_array):
    with pytest.raises(ParameterError):
        BbstIndex(fixture_array, 0)
    idx = BbstIndex(fixture_array, 4)
    with pytest.raises(RangeError):
        idx.query(fixture_array, 5, 16)
    with pytest.raises(RangeError):
        idx.try_query(6, 5)


@settings(max_examples=50, deadline=None)
@given(values=st.lists(st.integers(0, 4), min_size=1, max_size=200), k=st.integers(1, 40))
def test_exhaustive_small(values, k):
    a = np.array(values, dtype=np.uint32)
    idx = BbstIndex(a, k)
    ls, rs = all_pairs(len(a))
    batch = QueryBatch(ls, rs)
    res = idx.query_batch(a, batch)
    assert count_mismatches(a, batch, res.positions) == 0
    # consistency of the A-free read with the full query
    tried = idx.try_batch(batch)
    hit = tried >= 0
    assert np.array_equal(a[tried[hit]], a[res.positions[hit]])
    assert np.array_equal(hit, ~res.fell_back)


@pytest.mark.parametrize("k", [4, 16, 100, 512])
def test_random_oracle(k):
    a = generate_array(10**5, k)
    for width in (8, 2000, 10**5):
        batch = generate_queries(10**5, 10**5 // 4, width, k + width)
        res = BbstIndex(a, k).query_batch(a, batch)
        assert count_mismatches(a, batch, res.positions) == 0


def test_scalar_matches_batch():
    a = generate_array(5000, 1)
    idx = BbstIndex(a, 32)
    batch = generate_queries(5000, 500, 300, 2)
    res = idx.query_batch(a, batch)
    assert [idx.query(a, q.l, q.r) for q in batch] == res.positions.tolist()


def test_fallback_scan_is_bounded():
    a = generate_array(50000, 3)
    k = 128
    res = BbstIndex(a, k).query_batch(a, generate_queries(50000, 20000, 5000, 4))
    assert res.touched.max() <= 2 * k
    assert (res.touched[~res.fell_back] == 0).all()


def test_fallback_rate_shrinks_with_width():
    a = generate_array(10**6, 9)
    idx = BbstIndex(a, 512)
    rates = [idx.query_batch(a, generate_fixed_width_queries(10**6, 20000, w, w)).fallback_rate
             for w in (2**12, 2**15, 2**18)]
    assert rates[0] > rates[1] > rates[2]
    for w, rate in zip((2**12, 2**15, 2**18), rates):
        assert rate <= 4 * 512 / w


@pytest.mark.parametrize("n, k, table_bpe, total_bpe", [
    (2**30, 512, 2.625, 34.625),
    (2**30, 4096, 0.28125, 32.28125),
])
def test_space_formula(n, k, table_bpe, total_bpe):
    rep = bbst_space_bits(n, k)
    assert rep.per_element()["sparse_table"] == table_bpe
    assert rep.bits_per_element == total_bpe


@pytest.mark.parametrize("n, k", [(1, 1), (1000, 7), (4096, 64), (100003, 512)])
def test_space_formula_matches_built(n, k):
    a = np.zeros(n, dtype=np.uint32)
    assert bbst_space_bits(n, k).sparse_table_bits == BbstIndex(a, k).space_bits()


def test_threads_do_not_change_answers():
    a = generate_array(10**5, 2)
    idx = BbstIndex(a, 64)
    batch = generate_queries(10**5, 20000, 3000, 3)
    r1, r4 = idx.query_batch(a, batch, 1), idx.query_batch(a, batch, 4)
    assert np.array_equal(r1.positions, r4.positions)
    assert np.array_equal(r1.fell_back, r4.fell_back)
