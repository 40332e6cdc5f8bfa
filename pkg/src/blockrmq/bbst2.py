"""Two-level block sparse table.

A ``k1``-block sparse table answers the speculative read; its fallback scan is
shortened by one-byte minimum offsets stored for every ``k2``-block, so only
the partial ``k2``-blocks at the query ends are read cell by cell.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels as K
from .bbst import INPUT_BITS, BatchResult, BbstIndex, sparse_layer_bits
from .core import ParameterError, QueryBatch, SpaceReport, as_input_array, check_range

MAX_K2 = 256
OFFSET_BITS = 8


def check_block_sizes(k1: int, k2: int) -> None:
    if k1 < 1 or k2 < 1:
        raise ParameterError("block sizes must be >= 1")
    if k2 > MAX_K2:
        raise ParameterError(f"k2 must be <= {MAX_K2} so offsets fit one byte")
    if k1 % k2:
        raise ParameterError(f"k2={k2} must divide k1={k1}")


def _nearest_pow2(x: float) -> int:
    return 1 << max(0, round(math.log2(x)))


def auto_block_sizes(n: int) -> tuple[int, int]:
    """Powers of two nearest to sqrt(n log n) and sqrt(n / log n), within the byte limit."""
    log_n = max(1.0, math.log2(n))
    k1 = min(_nearest_pow2(math.sqrt(n * log_n)), 1 << max(0, n.bit_length() - 1))
    k2 = min(_nearest_pow2(math.sqrt(n / log_n)), MAX_K2, k1)
    return k1, k2


class Bbst2Index:
    """``top`` is a plain index with block size ``k1``; ``offsets`` has one byte per ``k2``-block."""

    def __init__(self, values, k1: int, k2: int):
        check_block_sizes(k1, k2)
        values = as_input_array(values)
        self.n = len(values)
        self.k1 = k1
        self.k2 = k2
        self.top = BbstIndex(values, k1)
        self.offsets = K.block_offsets(values, k2)

    def query(self, values, l: int, r: int) -> int:
        return self.top._query(self.top._check_values(values), l, r, self.offsets, self.k2)[0]

    def query_traced(self, values, l: int, r: int) -> tuple[int, bool, int]:
        """Answer plus whether the fallback ran and how many cells/offsets it touched."""
        return self.top._query(self.top._check_values(values), l, r, self.offsets, self.k2)

    def query_batch(self, values, batch: QueryBatch, threads: int = 1) -> BatchResult:
        values = self.top._check_values(values)
        return self.top._query_batch(values, batch, self.offsets, self.k2, threads)

    def try_query(self, l: int, r: int) -> int | None:
        return self.top.try_query(l, r)

    def try_batch(self, batch: QueryBatch, threads: int = 1) -> np.ndarray:
        return self.top.try_batch(batch, threads)

    def success_rate(self, batch: QueryBatch, threads: int = 1) -> float:
        return self.top.success_rate(batch, threads)

    def space_report(self) -> SpaceReport:
        return SpaceReport("bbst2", self.n, backend_bits=INPUT_BITS * self.n,
                           sparse_table_bits=self.top.space_bits(),
                           second_level_bits=self.offsets.size * OFFSET_BITS,
                           params={"k1": self.k1, "k2": self.k2})


def bbst2_build(values, k1: int, k2: int) -> Bbst2Index:
    return Bbst2Index(values, k1, k2)


def bbst2_query(values, idx: Bbst2Index, l: int, r: int) -> int:
    return idx.query(values, l, r)


def bbst2_try_query(idx: Bbst2Index, l: int, r: int) -> int | None:
    check_range(idx.n, l, r)
    return idx.try_query(l, r)


def bbst2_space_bits(n: int, k1: int, k2: int) -> SpaceReport:
    check_block_sizes(k1, k2)
    return SpaceReport("bbst2", n, backend_bits=INPUT_BITS * n,
                       sparse_table_bits=sparse_layer_bits(n, k1),
                       second_level_bits=-(-n // k2) * OFFSET_BITS,
                       params={"k1": k1, "k2": k2})
