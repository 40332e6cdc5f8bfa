"""Classic sparse table generalized to arity >= 2.

Layer ``j`` holds, for every start ``i``, the (position, value) of the
minimum over ``values[i .. min(i + arity**j - 1, n - 1)]``. A query reads at
most ``arity`` overlapping entries from a single layer.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from .core import ParameterError, QueryBatch, as_input_array, check_range, run_chunked

ENTRY_BITS = 64


def layer_count(n: int, arity: int = 2) -> int:
    """``max(1, ceil(log_arity n))`` computed in integers."""
    layers, span = 0, 1
    while span < n:
        span *= arity
        layers += 1
    return max(1, layers)


class SparseTable:
    """Sparse table over ``values`` whose entries carry both position and value."""

    def __init__(self, values, arity: int = 2):
        if arity < 2:
            raise ParameterError("arity must be >= 2")
        values = as_input_array(values)
        self.n = len(values)
        self.arity = arity
        self.n_layers = layer_count(self.n, arity)
        self.powers = np.array([arity**j for j in range(self.n_layers)], dtype=np.int64)
        self.pos, self.val = K.st_build_layers(values, arity, self.n_layers)

    def entry(self, i: int, j: int) -> tuple[int, int]:
        return int(self.pos[j, i]), int(self.val[j, i])

    def query(self, l: int, r: int) -> int:
        check_range(self.n, l, r)
        return int(K.st_query_one(self.pos, self.val, self.powers, l, r))

    def query_batch(self, batch: QueryBatch, threads: int = 1) -> np.ndarray:
        batch.validate(self.n)
        out = np.empty(batch.q, dtype=np.int64)

        def work(sl):
            K.st_query_batch(self.pos, self.val, self.powers, batch.ls[sl], batch.rs[sl], out[sl])

        run_chunked(work, batch.q, threads)
        return out

    def space_bits(self) -> int:
        return self.pos.size * ENTRY_BITS


def st_build(values, arity: int = 2) -> SparseTable:
    return SparseTable(values, arity)


def st_query(st: SparseTable, l: int, r: int) -> int:
    return st.query(l, r)


def st_space_bits(n: int, arity: int = 2, entry_bits: int = ENTRY_BITS) -> int:
    return layer_count(n, arity) * n * entry_bits


class SparseTableBackend:
    """Reference constant-time backend for the hybrid: needs no input array at query time."""

    name = "st"

    def __init__(self, values, arity: int = 2):
        self.table = SparseTable(values, arity)

    def query(self, l: int, r: int) -> int:
        return self.table.query(l, r)

    def query_batch(self, batch: QueryBatch, threads: int = 1) -> np.ndarray:
        return self.table.query_batch(batch, threads)

    def space_bits(self) -> int:
        return self.table.space_bits()
