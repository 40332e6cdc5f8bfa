"""Compact block sparse table and quantized block minima.

Every 9th layer (``j % 9 == 0``) keeps full 64-bit (position, value)
entries. The other layers keep only a reference:

* byte mode: ``m`` in ``[0, 2**(j - base) - 1]`` such that the span minimum
  equals the direct entry at ``i + m * 2**base`` of base layer
  ``base = 9 * (j // 9)``. The aligned sub-span starting there contains the
  span minimum, so it has the same minimum value.
* bit mode: one bit telling whether the minimum lies in the left or the right
  half-span of layer ``j - 1``; resolution descends one layer per bit.

``QuantizedMinima`` adds, per ``k2``-block, the minimum offset and an 8-bit
monotone code of the minimum value. Codes compare safely only when they differ.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from .bbst import INPUT_BITS, BatchResult, BlockSparseTable, _block_layers
from .bbst2 import OFFSET_BITS, check_block_sizes
from .core import ParameterError, QueryBatch, SpaceReport, as_input_array
from .sparse_table import ENTRY_BITS, layer_count

DIRECT_PERIOD = 9
MAX_Q = 255
EXPONENT = 8
MODES = {"byte": K.MODE_BYTE, "bit": K.MODE_BIT}
DELTA_BITS = {"byte": 8, "bit": 1}
VALUE_BITS = {"none": 0, "exact": 32, "quantized": 8}


def quantize(v: int, min_min: int, max_min: int, max_q: int = MAX_Q) -> int:
    """``floor(max_q * (1 - (max_min - v)**8 / (max_min - min_min)**8))`` in exact integers."""
    if not min_min <= v <= max_min:
        raise ParameterError(f"value {v} outside [{min_min}, {max_min}]")
    if max_min == min_min:
        return 0
    full = (max_min - min_min) ** EXPONENT
    return max_q * (full - (max_min - v) ** EXPONENT) // full


def quantize_array(values: np.ndarray, min_min: int, max_min: int, max_q: int = MAX_Q) -> np.ndarray:
    values = np.asarray(values)
    if values.size and (int(values.min()) < min_min or int(values.max()) > max_min):
        raise ParameterError("values outside [min_min, max_min]")
    if max_min == min_min:
        return np.zeros(values.size, dtype=np.uint8)
    full = (max_min - min_min) ** EXPONENT
    codes = [max_q * (full - (max_min - v) ** EXPONENT) // full for v in values.tolist()]
    return np.array(codes, dtype=np.uint8 if max_q <= 255 else np.int64)


class QuantizedMinima:
    """Per ``k2``-block minimum offset and quantized minimum value."""

    def __init__(self, values, k2: int, max_q: int = MAX_Q):
        if not 1 <= k2 <= 256:
            raise ParameterError("k2 must be in [1, 256]")
        values = as_input_array(values)
        self.k2 = k2
        self.max_q = max_q
        self.offsets = K.block_offsets(values, k2)
        starts = np.arange(self.offsets.size, dtype=np.int64) * k2
        minima = values[starts + self.offsets]
        self.min_min = int(minima.min())
        self.max_min = int(minima.max())
        self.codes = quantize_array(minima, self.min_min, self.max_min, max_q)

    def code(self, v: int) -> int:
        return quantize(v, self.min_min, self.max_min, self.max_q)

    def space_bits(self) -> int:
        return self.offsets.size * OFFSET_BITS + self.codes.size * 8


def _delta_row(layer_pos: np.ndarray, j: int, k: int, mode: str) -> np.ndarray:
    """Encode one layer of absolute minimum positions as references."""
    n_blocks = layer_pos.size
    i = np.arange(n_blocks, dtype=np.int64)
    min_block = layer_pos.astype(np.int64) // k
    if mode == "byte":
        base = j - j % DIRECT_PERIOD
        return ((min_block - i) >> base).astype(np.uint8)
    bits = (min_block >= i + (1 << (j - 1))).astype(np.uint8)
    return np.packbits(bits, bitorder="little")


class CompactIndex(BlockSparseTable):
    """Compact block sparse table, optionally with quantized ``k2``-block minima."""

    def __init__(self, values, k: int, mode: str = "byte", k2: int | None = None):
        if k < 1:
            raise ParameterError("block size k must be >= 1")
        if mode not in MODES:
            raise ParameterError(f"mode must be one of {sorted(MODES)}")
        if k2 is not None:
            check_block_sizes(k, k2)
        values = as_input_array(values)
        self.n = len(values)
        self.k = k
        self.n_blocks = -(-self.n // k)
        self.mode_name = mode
        self.mode = MODES[mode]
        self.period = DIRECT_PERIOD

        pos, val, self.n_layers = _block_layers(values, k)
        direct = [j for j in range(self.n_layers) if j % DIRECT_PERIOD == 0]
        self.dpos = np.ascontiguousarray(pos[direct])
        self.dval = np.ascontiguousarray(val[direct])
        rows = [_delta_row(pos[j], j, k, mode) for j in range(self.n_layers) if j % DIRECT_PERIOD]
        width = self.n_blocks if mode == "byte" else -(-self.n_blocks // 8)
        self.deltas = np.array(rows, dtype=np.uint8).reshape(len(rows), width)

        self.second = QuantizedMinima(values, k2) if k2 is not None else None

    @property
    def k2(self) -> int:
        return self.second.k2 if self.second is not None else 0

    @property
    def n_delta_layers(self) -> int:
        return self.deltas.shape[0]

    def resolve(self, i: int, j: int) -> tuple[int, int]:
        return self.span_entry(i, j)

    def query(self, values, l: int, r: int) -> int:
        off = self.second.offsets if self.second is not None else np.zeros(0, np.uint8)
        return self._query(self._check_values(values), l, r, off, self.k2)[0]

    def query_batch(self, values, batch: QueryBatch, threads: int = 1) -> BatchResult:
        off = self.second.offsets if self.second is not None else np.zeros(0, np.uint8)
        return self._query_batch(self._check_values(values), batch, off, self.k2, threads)

    def space_bits(self) -> int:
        """Direct entries at 64 bits plus delta entries at 8 or 1 bit."""
        return (self.dpos.size * ENTRY_BITS
                + self.n_delta_layers * self.n_blocks * DELTA_BITS[self.mode_name])

    def space_report(self) -> SpaceReport:
        second = self.second
        return SpaceReport(
            "cbbst2" if second else "cbbst", self.n,
            backend_bits=INPUT_BITS * self.n,
            sparse_table_bits=self.space_bits(),
            second_level_bits=second.offsets.size * OFFSET_BITS if second else 0,
            second_level_value_bits=second.codes.size * 8 if second else 0,
            params={"k": self.k, "mode": self.mode_name, "k2": self.k2},
        )


def cbbst_build(values, k: int, mode: str = "byte", second_level: int | None = None) -> CompactIndex:
    return CompactIndex(values, k, mode, second_level)


def delta_resolve(idx: CompactIndex, i: int, j: int) -> tuple[int, int]:
    return idx.resolve(i, j)


def cbbst_try_query(idx: CompactIndex, l: int, r: int) -> int | None:
    return idx.try_query(l, r)


def compact_layer_bits(n: int, k: int, mode: str = "byte") -> int:
    if mode not in DELTA_BITS:
        raise ParameterError(f"mode must be one of {sorted(DELTA_BITS)}")
    n_blocks = -(-n // k)
    n_layers = layer_count(n_blocks, 2)
    n_direct = (n_layers - 1) // DIRECT_PERIOD + 1
    return (n_direct * n_blocks * ENTRY_BITS
            + (n_layers - n_direct) * n_blocks * DELTA_BITS[mode])


def second_level_bits(n: int, k2: int, value_mode: str = "none") -> tuple[int, int]:
    """(offset bits, value bits) of a ``k2`` second level."""
    if value_mode not in VALUE_BITS:
        raise ParameterError(f"value mode must be one of {sorted(VALUE_BITS)}")
    blocks = -(-n // k2)
    return blocks * OFFSET_BITS, blocks * VALUE_BITS[value_mode]


def cbbst_space_bits(n: int, k: int, mode: str = "byte", second_level: int | None = None,
                     value_mode: str = "quantized") -> SpaceReport:
    offsets, value_bits = (0, 0)
    if second_level is not None:
        check_block_sizes(k, second_level)
        offsets, value_bits = second_level_bits(n, second_level, value_mode)
    return SpaceReport("cbbst2" if second_level else "cbbst", n,
                       backend_bits=INPUT_BITS * n,
                       sparse_table_bits=compact_layer_bits(n, k, mode),
                       second_level_bits=offsets, second_level_value_bits=value_bits,
                       params={"k": k, "mode": mode, "k2": second_level or 0})
