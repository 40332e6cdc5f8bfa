"""One-level block-based sparse table.

The array is cut into blocks of ``k`` elements (the last one may be short).
Layer ``j`` entry ``i`` stores the (position, value) of the minimum over
blocks ``i .. min(i + 2**j - 1, B - 1)``. A query first reads the minimum of
the smallest block span containing it; only when that position falls outside
the query does it scan the two boundary blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .core import ParameterError, QueryBatch, SpaceReport, as_input_array, check_range, run_chunked
from .sparse_table import ENTRY_BITS, layer_count

INPUT_BITS = 32
_NO_OFFSETS = np.zeros(0, dtype=np.uint8)
_NO_DELTAS = np.zeros((0, 0), dtype=np.uint8)


@dataclass
class BatchResult:
    positions: np.ndarray
    fell_back: np.ndarray
    touched: np.ndarray

    @property
    def fallback_rate(self) -> float:
        return float(self.fell_back.mean()) if self.fell_back.size else 0.0


class BlockSparseTable:
    """Layer storage and lookups shared by the plain and compact indexes.

    Subclasses fill ``dpos``, ``dval``, ``deltas``, ``period`` and ``mode``
    (see ``_kernels`` for the layout).
    """

    n: int
    k: int
    n_blocks: int
    n_layers: int
    dpos: np.ndarray
    dval: np.ndarray
    deltas: np.ndarray = _NO_DELTAS
    period: int = 1
    mode: int = K.MODE_PLAIN

    def _layout(self):
        return (self.dpos, self.dval, self.deltas, self.period, self.mode, self.n_layers)

    def span_entry(self, i: int, j: int) -> tuple[int, int]:
        """Resolved (position, value) for layer ``j``, block ``i``."""
        if not 0 <= j < self.n_layers or not 0 <= i < self.n_blocks:
            raise IndexError(f"no entry ({i}, {j})")
        p, v = K.span_min(self.dpos, self.dval, self.deltas, self.period, self.mode, i, j)
        return int(p), int(v)

    def try_query(self, l: int, r: int) -> int | None:
        """Speculative read only; ``None`` when the answer would need the array."""
        check_range(self.n, l, r)
        p = K.bbst_try_one(*self._layout(), self.k, l, r)
        return None if p < 0 else int(p)

    def try_batch(self, batch: QueryBatch, threads: int = 1) -> np.ndarray:
        """Positions, or -1 where the speculative read declines."""
        batch.validate(self.n)
        out = np.empty(batch.q, dtype=np.int64)

        def work(sl):
            K.bbst_try_batch(*self._layout(), self.k, batch.ls[sl], batch.rs[sl], out[sl])

        run_chunked(work, batch.q, threads)
        return out

    def success_rate(self, batch: QueryBatch, threads: int = 1) -> float:
        return float(np.mean(self.try_batch(batch, threads) >= 0))

    def _query(self, values, l, r, off=_NO_OFFSETS, k2=0):
        check_range(self.n, l, r)
        p, fell_back, touched = K.bbst_query_one(values, *self._layout(), self.k, off, k2, l, r)
        return int(p), bool(fell_back), int(touched)

    def _query_batch(self, values, batch, off=_NO_OFFSETS, k2=0, threads=1) -> BatchResult:
        batch.validate(self.n)
        res = BatchResult(np.empty(batch.q, dtype=np.int64),
                          np.empty(batch.q, dtype=np.bool_),
                          np.empty(batch.q, dtype=np.int64))

        def work(sl):
            K.bbst_query_batch(values, *self._layout(), self.k, off, k2,
                               batch.ls[sl], batch.rs[sl],
                               res.positions[sl], res.fell_back[sl], res.touched[sl])

        run_chunked(work, batch.q, threads)
        return res

    def _check_values(self, values) -> np.ndarray:
        values = as_input_array(values)
        if len(values) != self.n:
            raise ParameterError(f"index built for n={self.n}, got array of {len(values)}")
        return values


def _block_layers(values: np.ndarray, k: int):
    """Full-row layers of absolute (position, value) over the blocks of ``values``."""
    bpos, bval = K.block_minima(values, k)
    n_layers = layer_count(len(bval), 2)
    rel, val = K.st_build_layers(bval, 2, n_layers)
    return bpos[rel], val, n_layers


class BbstIndex(BlockSparseTable):
    """Plain block sparse table; answering full queries needs the array."""

    def __init__(self, values, k: int):
        if k < 1:
            raise ParameterError("block size k must be >= 1")
        values = as_input_array(values)
        self.n = len(values)
        self.k = k
        self.n_blocks = -(-self.n // k)
        self.dpos, self.dval, self.n_layers = _block_layers(values, k)

    def query(self, values, l: int, r: int) -> int:
        return self._query(self._check_values(values), l, r)[0]

    def query_batch(self, values, batch: QueryBatch, threads: int = 1) -> BatchResult:
        return self._query_batch(self._check_values(values), batch, threads=threads)

    def space_bits(self) -> int:
        """Entry count of the stored layers times 64 bits."""
        return self.dpos.size * ENTRY_BITS

    def space_report(self) -> SpaceReport:
        return SpaceReport("bbst", self.n, backend_bits=INPUT_BITS * self.n,
                           sparse_table_bits=self.space_bits(), params={"k": self.k})


def bbst_build(values, k: int) -> BbstIndex:
    return BbstIndex(values, k)


def bbst_query(values, idx: BbstIndex, l: int, r: int) -> int:
    return idx.query(values, l, r)


def bbst_try_query(idx: BbstIndex, l: int, r: int) -> int | None:
    return idx.try_query(l, r)


def sparse_layer_bits(n: int, k: int) -> int:
    n_blocks = -(-n // k)
    return layer_count(n_blocks, 2) * n_blocks * ENTRY_BITS


def bbst_space_bits(n: int, k: int) -> SpaceReport:
    return SpaceReport("bbst", n, backend_bits=INPUT_BITS * n,
                       sparse_table_bits=sparse_layer_bits(n, k), params={"k": k})
