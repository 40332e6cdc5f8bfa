import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockrmq.bbst import BbstIndex
from blockrmq.core import ParameterError, QueryBatch, count_mismatches, generate_array, generate_queries
from blockrmq.offline import (
    OfflinePipeline,
    answer_batch_con,
    answer_batch_plain,
    contract,
    default_plain_k,
    sort_endpoints,
)


def batch_of(*pairs):
    return QueryBatch.from_pairs(list(pairs))


def test_sort_example():
    ends = sort_endpoints(batch_of((2, 9), (5, 13)))
    assert ends.x.tolist() == [2, 5, 9, 13]
    assert ends.y.tolist() == [0, 1, 0, 1]
    assert ends.side.tolist() == [0, 0, 1, 1]


def test_sort_tie_order():
    ends = sort_endpoints(batch_of((4, 4)))
    assert ends.x.tolist() == [4, 4] and ends.side.tolist() == [0, 1]


@pytest.mark.parametrize("seed", range(5))
def test_sorters_agree_and_permute(seed):
    batch = generate_queries(10**6, 5000, 1000, seed)
    radix = sort_endpoints(batch, "radix")
    comp = sort_endpoints(batch, "comparison")
    for f in ("x", "y", "side"):
        assert np.array_equal(getattr(radix, f), getattr(comp, f))
    assert (np.diff(radix.x) >= 0).all()
    assert sorted(radix.x.tolist()) == sorted(batch.ls.tolist() + batch.rs.tolist())
    left = radix.side == 0
    assert np.array_equal(radix.x[left], batch.ls[radix.y[left]])
    assert np.array_equal(radix.x[~left], batch.rs[radix.y[~left]])


def test_sort_rejects():
    with pytest.raises(ParameterError):
        sort_endpoints(QueryBatch(np.zeros(0, np.int64), np.zeros(0, np.int64)))
    with pytest.raises(ParameterError):
        sort_endpoints(batch_of((0, 1)), "bogo")


def test_contract_example(fixture_array):
    con = contract(fixture_array, sort_endpoints(batch_of((2, 9), (5, 13))))
    assert con.aq.tolist() == [1, 2, 3]
    assert con.mapping.tolist() == [3, 6, 9]
    assert con.bounds.tolist() == [2, 5, 9, 13]


def test_contract_all_endpoints_equal(fixture_array):
    batch = batch_of((7, 7), (7, 7))
    con = contract(fixture_array, sort_endpoints(batch))
    assert con.aq.size == 0
    res = answer_batch_con(fixture_array, batch)
    assert res.positions.tolist() == [7, 7] and res.contracted_size == 0


def test_con_fixture(fixture_array):
    res = answer_batch_con(fixture_array, batch_of((2, 9), (5, 13)), k=2)
    assert fixture_array[res.positions].tolist() == [1, 2]


def test_contraction_soundness_exhaustive():
    rng = np.random.default_rng(0)
    for n in (1, 2, 5, 16, 64):
        a = rng.integers(0, 6, n).astype(np.uint32)
        pairs = [(l, r) for l in range(n) for r in range(l, n)]
        chosen = pairs if len(pairs) <= 40 else [pairs[i] for i in rng.choice(len(pairs), 40, replace=False)]
        for q in (1, 2, 3):
            for combo in itertools.combinations(chosen, q) if len(chosen) <= 12 else (
                    [chosen[i] for i in rng.choice(len(chosen), q, replace=False)] for _ in range(300)):
                batch = batch_of(*combo)
                con = contract(a, sort_endpoints(batch))
                assert con.aq.size <= 2 * q - 1
                assert np.array_equal(a[con.mapping], con.aq)
                for l, r in combo:
                    x, y = con.rank(l), con.rank(r)
                    expect = a[l:r + 1].min()
                    got = con.aq[x:y].min() if x < y else a[l]
                    assert got == expect
                res = answer_batch_con(a, batch, k=2)
                assert count_mismatches(a, batch, res.positions) == 0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 999), st.integers(0, 999)), min_size=1, max_size=40))
def test_contracted_size_bound(pairs):
    batch = batch_of(*[(min(p), max(p)) for p in pairs])
    res = answer_batch_con(np.arange(1000, dtype=np.uint32)[::-1].copy(), batch)
    distinct = np.unique(np.concatenate([batch.ls, batch.rs])).size
    assert res.contracted_size == distinct - 1 <= 2 * batch.q - 1


def test_distinct_endpoints_reach_bound():
    rng = np.random.default_rng(3)
    pts = rng.choice(10**6, 2000, replace=False).reshape(-1, 2)
    pts.sort(axis=1)
    batch = QueryBatch(pts[:, 0].copy(), pts[:, 1].copy())
    res = answer_batch_con(generate_array(10**6, 1), batch)
    assert res.contracted_size == 2 * batch.q - 1


def test_width_one_batches():
    a = generate_array(1000, 2)
    batch = generate_queries(1000, 300, 1, 4)
    for res in (answer_batch_con(a, batch), answer_batch_plain(a, batch)):
        assert np.array_equal(res.positions, batch.ls)


@pytest.mark.parametrize("sorter", ["radix", "comparison"])
@pytest.mark.parametrize("width", [64, 10**6])
@pytest.mark.parametrize("q", [1000, 32000])
def test_con_oracle(sorter, width, q):
    a = generate_array(10**6, 7)
    batch = generate_queries(10**6, q, width, q + width)
    res = answer_batch_con(a, batch, sorter=sorter)
    assert count_mismatches(a, batch, res.positions) == 0
    assert set(res.stage_seconds) == {"sort", "contract", "build", "answer"}


def test_plain_oracle_and_agreement():
    a = generate_array(10**6, 9)
    batch = generate_queries(10**6, 1000, 10**6, 1)
    res = answer_batch_plain(a, batch)
    assert count_mismatches(a, batch, res.positions) == 0
    same = BbstIndex(a, default_plain_k(10**6)).query_batch(a, batch)
    assert np.array_equal(res.positions, same.positions)


def test_default_plain_k():
    assert default_plain_k(2**20) == 1024
    assert default_plain_k(1) == 1
    assert default_plain_k(10**6) == 1024


def test_threads_bit_identical():
    a = generate_array(10**5, 5)
    batch = generate_queries(10**5, 20000, 5000, 6)
    r1 = answer_batch_con(a, batch, threads=1)
    r4 = answer_batch_con(a, batch, threads=4)
    assert np.array_equal(r1.positions, r4.positions)
    assert np.array_equal(r1.fell_back, r4.fell_back)


def test_pipeline_single_use():
    a = generate_array(100, 1)
    pipe = OfflinePipeline(4)
    pipe.run(a, batch_of((0, 50)))
    with pytest.raises(RuntimeError):
        pipe.run(a, batch_of((0, 50)))


def test_rejects_invalid_batch():
    with pytest.raises(Exception):
        answer_batch_con(generate_array(10, 1), batch_of((3, 10)))
    with pytest.raises(ParameterError):
        OfflinePipeline(0)
