"""Block sparse table front end over a constant-time backend that never reads A.

The front answers what it can from stored minima; everything it declines is
delegated to the backend. Once built, neither component keeps a reference to
the input array.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from . import _kernels as K
from .bbst import BbstIndex
from .bbst2 import OFFSET_BITS, check_block_sizes
from .compact import CompactIndex, compact_layer_bits, second_level_bits
from .core import ParameterError, QueryBatch, SpaceReport, as_input_array, check_range, run_chunked
from .bbst import sparse_layer_bits
from .sparse_table import SparseTableBackend, st_space_bits

FRONTS = ("bbst", "bbst2", "cbbst", "cbbst2")


class RmqBackend(Protocol):
    def query(self, l: int, r: int) -> int: ...

    def query_batch(self, batch: QueryBatch, threads: int = 1) -> np.ndarray: ...

    def space_bits(self) -> int: ...


@dataclass
class PathCounters:
    speculative_hits: int = 0
    second_level_hits: int = 0
    tie_declines: int = 0
    range_declines: int = 0

    @property
    def total(self) -> int:
        return (self.speculative_hits + self.second_level_hits
                + self.tie_declines + self.range_declines)

    @property
    def backend_queries(self) -> int:
        return self.tie_declines + self.range_declines

    def add(self, outcome: np.ndarray) -> None:
        counts = np.bincount(outcome, minlength=4)
        self.speculative_hits += int(counts[K.SPECULATIVE_HIT])
        self.second_level_hits += int(counts[K.SECOND_LEVEL_HIT])
        self.tie_declines += int(counts[K.TIE_DECLINE])
        self.range_declines += int(counts[K.RANGE_DECLINE])


@dataclass
class HybridResult:
    positions: np.ndarray
    outcome: np.ndarray

    @property
    def front_rate(self) -> float:
        return float(np.mean(self.outcome <= K.SECOND_LEVEL_HIT))


class HybridIndex:
    """Front end of kind ``front`` plus a backend built by ``backend_builder(values)``.

    ``bbst2`` keeps exact 32-bit minima for its ``k2``-blocks, ``cbbst2`` keeps
    8-bit quantized codes and sends code ties to the backend.
    """

    def __init__(self, values, front: str = "cbbst2", k: int = 512, k2: int | None = None,
                 mode: str = "byte",
                 backend_builder: Callable[[np.ndarray], RmqBackend] = SparseTableBackend):
        if front not in FRONTS:
            raise ParameterError(f"front must be one of {FRONTS}")
        values = as_input_array(values)
        self.n = len(values)
        self.front_kind = front
        self.k = k
        self.counters = PathCounters()
        self._lock = threading.Lock()
        self.offsets = np.zeros(0, dtype=np.uint8)
        self.keys = np.zeros(0, dtype=np.uint32)
        self.k2 = 0
        self.ties_decline = False

        if front in ("bbst2", "cbbst2"):
            if k2 is None:
                raise ParameterError(f"front {front} needs k2")
            check_block_sizes(k, k2)
        if front == "bbst":
            self.front = BbstIndex(values, k)
        elif front == "bbst2":
            self.front = BbstIndex(values, k)
            self.k2 = k2
            self.offsets = K.block_offsets(values, k2)
            starts = np.arange(self.offsets.size, dtype=np.int64) * k2
            self.keys = values[starts + self.offsets]
        elif front == "cbbst":
            self.front = CompactIndex(values, k, mode)
        else:
            self.front = CompactIndex(values, k, mode, k2)
            self.k2 = k2
            self.offsets = self.front.second.offsets
            self.keys = self.front.second.codes
            self.ties_decline = True
        self.backend = backend_builder(values)

    def _front_batch(self, ls, rs, out, outcome):
        K.front_try_batch(*self.front._layout(), self.k, self.offsets, self.keys, self.k2,
                          self.ties_decline, ls, rs, out, outcome)

    def front_query(self, l: int, r: int) -> tuple[int, int]:
        """(position or -1, outcome code) of the front end alone."""
        check_range(self.n, l, r)
        out = np.empty(1, dtype=np.int64)
        outcome = np.empty(1, dtype=np.int64)
        self._front_batch(np.array([l], np.int64), np.array([r], np.int64), out, outcome)
        return int(out[0]), int(outcome[0])

    def query(self, l: int, r: int) -> int:
        pos, outcome = self.front_query(l, r)
        with self._lock:
            self.counters.add(np.array([outcome]))
        if pos < 0:
            pos = self.backend.query(l, r)
        return pos

    def front_batch(self, batch: QueryBatch, threads: int = 1) -> HybridResult:
        batch.validate(self.n)
        res = HybridResult(np.empty(batch.q, dtype=np.int64), np.empty(batch.q, dtype=np.int64))

        def work(sl):
            self._front_batch(batch.ls[sl], batch.rs[sl], res.positions[sl], res.outcome[sl])

        run_chunked(work, batch.q, threads)
        return res

    def query_batch(self, batch: QueryBatch, threads: int = 1) -> HybridResult:
        res = self.front_batch(batch, threads)
        declined = np.flatnonzero(res.positions < 0)
        if declined.size:
            sub = QueryBatch(batch.ls[declined], batch.rs[declined])
            res.positions[declined] = self.backend.query_batch(sub, threads)
        with self._lock:
            self.counters.add(res.outcome)
        return res

    def success_rate(self, batch: QueryBatch, threads: int = 1) -> float:
        return self.front_batch(batch, threads).front_rate

    def space_report(self) -> SpaceReport:
        value_bits = {"bbst2": 32, "cbbst2": 8}.get(self.front_kind, 0)
        return SpaceReport(
            f"hybrid-{self.front_kind}", self.n,
            backend_bits=self.backend.space_bits(),
            sparse_table_bits=self.front.space_bits(),
            second_level_bits=self.offsets.size * OFFSET_BITS,
            second_level_value_bits=self.keys.size * value_bits,
            params={"k": self.k, "k2": self.k2},
        )


def hybrid_build(values, front: str = "cbbst2", k: int = 512, k2: int | None = None,
                 mode: str = "byte", backend_builder=SparseTableBackend) -> HybridIndex:
    return HybridIndex(values, front, k, k2, mode, backend_builder)


def hybrid_query(idx: HybridIndex, l: int, r: int) -> int:
    return idx.query(l, r)


def success_rate(idx, batch: QueryBatch, threads: int = 1) -> float:
    """Fraction of ``batch`` answered without the array (hybrid front or any try-capable index)."""
    return idx.success_rate(batch, threads)


def hybrid_space_bits(n: int, front: str = "cbbst2", k: int = 512, k2: int | None = None,
                      mode: str = "byte", backend_bits_per_element: float | None = None) -> SpaceReport:
    """Arithmetic space of a hybrid; the backend defaults to the reference sparse table."""
    if front not in FRONTS:
        raise ParameterError(f"front must be one of {FRONTS}")
    if backend_bits_per_element is None:
        backend = st_space_bits(n, 2)
    else:
        backend = round(backend_bits_per_element * n)
    if front in ("bbst", "bbst2"):
        table = sparse_layer_bits(n, k)
    else:
        table = compact_layer_bits(n, k, mode)
    offsets = values = 0
    if front in ("bbst2", "cbbst2"):
        if k2 is None:
            raise ParameterError(f"front {front} needs k2")
        check_block_sizes(k, k2)
        offsets, values = second_level_bits(n, k2, "exact" if front == "bbst2" else "quantized")
    return SpaceReport(f"hybrid-{front}", n, backend_bits=backend, sparse_table_bits=table,
                       second_level_bits=offsets, second_level_value_bits=values,
                       params={"k": k, "k2": k2 or 0, "mode": mode})
