"""Batched (offline) RMQ.

``OfflinePipeline`` runs four stages on a known batch:

1. sort the 2q query endpoints and remap every query to endpoint ranks,
2. contract the array to the minima of the cells between consecutive distinct
   endpoints (both ends inclusive, so at most 2q - 1 cells),
3. build a block sparse table over the contracted array,
4. answer every query on its cell range and map back to array positions.

``answer_batch_plain`` skips stages 1-2 and indexes the whole array.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .bbst import BatchResult, BbstIndex
from .core import ParameterError, QueryBatch, as_input_array, run_chunked

LEFT, RIGHT = 0, 1
DEFAULT_K = 512
SORTERS = ("radix", "comparison")


@dataclass
class EndpointList:
    """Endpoints sorted by (x, y, side): array position, query index, left/right."""

    x: np.ndarray
    y: np.ndarray
    side: np.ndarray

    def __len__(self) -> int:
        return int(self.x.size)


@dataclass
class ContractedArray:
    aq: np.ndarray
    mapping: np.ndarray
    bounds: np.ndarray  # distinct endpoint positions; cell c spans bounds[c] .. bounds[c + 1]

    def rank(self, x: int) -> int:
        return int(np.searchsorted(self.bounds, x))


def _pack(batch: QueryBatch) -> np.ndarray:
    if batch.q >= 2**31:
        raise ParameterError("at most 2**31 - 1 queries per batch")
    y = np.arange(batch.q, dtype=np.uint64) << np.uint64(1)
    left = (batch.ls.astype(np.uint64) << np.uint64(32)) | y
    right = (batch.rs.astype(np.uint64) << np.uint64(32)) | y | np.uint64(RIGHT)
    return np.concatenate([left, right])


def sort_endpoints(batch: QueryBatch, sorter: str = "radix") -> EndpointList:
    """Sort all endpoints; the packed key ``x << 32 | y << 1 | side`` makes the order total."""
    if batch.q < 1:
        raise ParameterError("query batch is empty")
    if sorter not in SORTERS:
        raise ParameterError(f"sorter must be one of {SORTERS}")
    keys = _pack(batch)
    keys = K.radix_sort_u64(keys) if sorter == "radix" else np.sort(keys, kind="stable")
    return EndpointList(
        x=(keys >> np.uint64(32)).astype(np.int64),
        y=((keys >> np.uint64(1)) & np.uint64(0x7FFFFFFF)).astype(np.int64),
        side=(keys & np.uint64(1)).astype(np.uint8),
    )


def contract(values, endpoints: EndpointList, threads: int = 1) -> ContractedArray:
    values = as_input_array(values)
    x = endpoints.x
    if x.size and x[-1] >= len(values):
        raise ParameterError("endpoint beyond the array")
    bounds = x[np.concatenate([[True], x[1:] != x[:-1]])] if x.size else x
    cells = max(0, bounds.size - 1)
    aq = np.empty(cells, dtype=np.uint32)
    mapping = np.empty(cells, dtype=np.int64)

    def work(sl):
        K.contract_cells(values, bounds, sl.start, sl.stop, aq, mapping)

    run_chunked(work, cells, threads)
    return ContractedArray(aq, mapping, bounds)


@dataclass
class OfflineResult:
    positions: np.ndarray
    fell_back: np.ndarray
    contracted_size: int
    stage_seconds: dict = field(default_factory=dict)

    @property
    def fallback_rate(self) -> float:
        return float(self.fell_back.mean()) if self.fell_back.size else 0.0


class OfflinePipeline:
    """Single-use runner of the four stages; records wall time per stage."""

    def __init__(self, k: int = DEFAULT_K, sorter: str = "radix", threads: int = 1):
        if k < 1:
            raise ParameterError("block size k must be >= 1")
        self.k = k
        self.sorter = sorter
        self.threads = threads
        self._used = False

    def run(self, values, batch: QueryBatch) -> OfflineResult:
        if self._used:
            raise RuntimeError("pipeline already ran; create a new one per batch")
        self._used = True
        values = as_input_array(values)
        batch.validate(len(values))
        times = {}

        t0 = time.perf_counter()
        ends = sort_endpoints(batch, self.sorter)
        change = np.concatenate([[0], (ends.x[1:] != ends.x[:-1]).astype(np.int64)])
        record_rank = np.cumsum(change)
        rank_l = np.empty(batch.q, dtype=np.int64)
        rank_r = np.empty(batch.q, dtype=np.int64)
        is_left = ends.side == LEFT
        rank_l[ends.y[is_left]] = record_rank[is_left]
        rank_r[ends.y[~is_left]] = record_rank[~is_left]
        times["sort"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        con = contract(values, ends, self.threads)
        times["contract"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        wide = np.flatnonzero(rank_l < rank_r)
        index = BbstIndex(con.aq, min(self.k, con.aq.size)) if wide.size else None
        times["build"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        positions = batch.ls.copy()
        fell_back = np.zeros(batch.q, dtype=np.bool_)
        if index is not None:
            cells = QueryBatch(rank_l[wide], rank_r[wide] - 1)
            res = index.query_batch(con.aq, cells, self.threads)
            positions[wide] = con.mapping[res.positions]
            fell_back[wide] = res.fell_back
        times["answer"] = time.perf_counter() - t0
        return OfflineResult(positions, fell_back, int(con.aq.size), times)


def answer_batch_con(values, batch: QueryBatch, k: int = DEFAULT_K, sorter: str = "radix",
                     threads: int = 1) -> OfflineResult:
    return OfflinePipeline(k, sorter, threads).run(values, batch)


def default_plain_k(n: int) -> int:
    """Power of two nearest to sqrt(n), at most n."""
    return min(1 << max(0, round(math.log2(n) / 2)), n)


def answer_batch_plain(values, batch: QueryBatch, k: int | None = None,
                       threads: int = 1) -> BatchResult:
    values = as_input_array(values)
    if k is None:
        k = default_plain_k(len(values))
    return BbstIndex(values, k).query_batch(values, batch, threads)
