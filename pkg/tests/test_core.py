import numpy as np
import pytest

from blockrmq.core import (
    ParameterError,
    QueryBatch,
    RangeError,
    count_mismatches,
    generate_array,
    generate_fixed_width_queries,
    generate_queries,
    read_array,
    read_queries,
    rmq_scan,
    validate_answer,
    write_answers,
    write_array,
    write_queries,
)

A8 = np.array([3, 1, 4, 1, 5, 9, 2, 6], dtype=np.uint32)


@pytest.mark.parametrize("l, r, expected", [(0, 7, 1), (4, 4, 4), (4, 7, 6)])
def test_rmq_scan_examples(l, r, expected):
    assert rmq_scan(A8, l, r) == expected


@pytest.mark.parametrize("l, r", [(3, 2), (0, 8), (-1, 2)])
def test_rmq_scan_rejects_bad_ranges(l, r):
    with pytest.raises(RangeError):
        rmq_scan(A8, l, r)


def test_validate_answer():
    a = np.array([3, 1, 4, 1], dtype=np.uint32)
    assert validate_answer(a, 0, 3, 3)
    assert not validate_answer(a, 0, 3, 0)
    assert not validate_answer(a, 2, 3, 1)


def test_generate_array_is_deterministic():
    assert np.array_equal(generate_array(8, 42), generate_array(8, 42))
    assert not np.array_equal(generate_array(8, 42), generate_array(8, 43))
    assert generate_array(1, 5).shape == (1,)
    assert generate_array(8, 1).dtype == np.uint32
    with pytest.raises(ParameterError):
        generate_array(0, 1)


def test_generate_array_mean():
    values = generate_array(10**6, 7)
    assert abs(values.mean() / 2**31 - 1) < 0.01


def test_generate_queries_width_one():
    batch = generate_queries(100, 50, 1, 3)
    assert (batch.ls == batch.rs).all()


def test_generate_queries_clamping():
    batch = generate_queries(100, 1000, 100, 3)
    widths = batch.rs - batch.ls + 1
    assert widths.min() >= 1 and widths.max() <= 100
    assert batch.rs.max() <= 99 and batch.ls.min() >= 0


def test_generate_queries_mean_width():
    n, w = 10**6, 2**15
    batch = generate_queries(n, 10**4, w, 11)
    widths = batch.rs - batch.ls + 1
    unclamped = widths[batch.rs < n - 1]
    assert abs(unclamped.mean() / ((w + 1) / 2) - 1) < 0.05


@pytest.mark.parametrize("width", [0, 101])
def test_generate_queries_rejects_width(width):
    with pytest.raises(ParameterError):
        generate_queries(100, 10, width, 1)


def test_fixed_width_queries():
    batch = generate_fixed_width_queries(1000, 500, 37, 2)
    assert ((batch.rs - batch.ls + 1) == 37).all()
    assert batch.rs.max() < 1000


def test_batch_validation():
    with pytest.raises(RangeError):
        QueryBatch.from_pairs([(0, 3), (5, 4)]).validate(10)
    with pytest.raises(ParameterError):
        QueryBatch.from_pairs([]).validate(10)


def test_count_mismatches_accepts_ties_only():
    a = np.array([2, 1, 1, 3], dtype=np.uint32)
    batch = QueryBatch.from_pairs([(0, 3), (0, 3), (0, 3)])
    assert count_mismatches(a, batch, np.array([1, 2, 0])) == 1


def test_array_round_trip(tmp_path):
    values = generate_array(100, 1)
    write_array(tmp_path / "a.bin", values)
    assert (tmp_path / "a.bin").stat().st_size == 400
    assert np.array_equal(read_array(tmp_path / "a.bin"), values)


@pytest.mark.parametrize("name", ["q.txt", "q.qbin"])
def test_query_round_trip(tmp_path, name):
    batch = generate_queries(1000, 50, 100, 1)
    write_queries(tmp_path / name, batch)
    back = read_queries(tmp_path / name)
    assert np.array_equal(back.ls, batch.ls) and np.array_equal(back.rs, batch.rs)


def test_query_text_format(tmp_path):
    write_queries(tmp_path / "q.txt", QueryBatch.from_pairs([(2, 9), (5, 13)]))
    assert (tmp_path / "q.txt").read_text() == "2 9\n5 13\n"


def test_answers_formats(tmp_path):
    write_answers(tmp_path / "a.txt", np.array([3, 6]))
    assert (tmp_path / "a.txt").read_text() == "3\n6\n"
    write_answers(tmp_path / "a.bin", np.array([3, 6]), binary=True)
    assert (tmp_path / "a.bin").read_bytes() == (3).to_bytes(8, "little") + (6).to_bytes(8, "little")
