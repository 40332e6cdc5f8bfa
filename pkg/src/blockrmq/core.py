"""Shared types, the brute-force oracle, generators and file formats.

Ranges are 0-based and inclusive on both ends: a query ``(l, r)`` covers
``A[l], ..., A[r]`` with ``0 <= l <= r < n``.

Random data comes from numpy's PCG64 bit generator (``numpy.random.default_rng``),
seeded with the caller's 64-bit seed. Changing the generator changes every
frozen regression value in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

U32_MAX = 2**32 - 1


class ParameterError(ValueError):
    """Invalid construction or generation parameter."""


class RangeError(IndexError):
    """Query range outside the indexed array."""


def as_input_array(values: Iterable[int] | np.ndarray) -> np.ndarray:
    """Validate ``values`` and return them as a contiguous ``uint32`` array."""
    if isinstance(values, np.ndarray) and values.dtype == np.uint32:
        arr = np.ascontiguousarray(values)
    else:
        raw = np.asarray(list(values) if not isinstance(values, np.ndarray) else values)
        if raw.size and (raw.min() < 0 or raw.max() > U32_MAX):
            raise ParameterError("array values must fit in 32 unsigned bits")
        arr = np.ascontiguousarray(raw, dtype=np.uint32)
    if arr.ndim != 1 or arr.size == 0:
        raise ParameterError("input array must be one-dimensional with n >= 1")
    return arr


@dataclass(frozen=True)
class Query:
    l: int
    r: int

    @property
    def width(self) -> int:
        return self.r - self.l + 1


@dataclass(frozen=True)
class QueryBatch:
    """Queries stored column-wise as two ``int64`` arrays."""

    ls: np.ndarray
    rs: np.ndarray
    max_width: int | None = None

    def __post_init__(self):
        ls = np.ascontiguousarray(self.ls, dtype=np.int64)
        rs = np.ascontiguousarray(self.rs, dtype=np.int64)
        if ls.shape != rs.shape or ls.ndim != 1:
            raise ParameterError("query bounds must be two equal-length vectors")
        object.__setattr__(self, "ls", ls)
        object.__setattr__(self, "rs", rs)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[int, int]], max_width: int | None = None):
        arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1], max_width)

    @property
    def q(self) -> int:
        return int(self.ls.size)

    def __len__(self) -> int:
        return self.q

    def __iter__(self):
        for l, r in zip(self.ls.tolist(), self.rs.tolist()):
            yield Query(l, r)

    def mean_width(self) -> float:
        """Mean of ``r - l + 1`` (the average width u)."""
        return float(np.mean(self.rs - self.ls + 1)) if self.q else 0.0

    def validate(self, n: int) -> None:
        if self.q < 1:
            raise ParameterError("query batch is empty")
        if (self.ls < 0).any() or (self.ls > self.rs).any() or (self.rs >= n).any():
            bad = np.flatnonzero((self.ls < 0) | (self.ls > self.rs) | (self.rs >= n))[0]
            raise RangeError(f"query {bad} = ({self.ls[bad]}, {self.rs[bad]}) invalid for n={n}")


def check_range(n: int, l: int, r: int) -> None:
    if not 0 <= l <= r < n:
        raise RangeError(f"invalid range ({l}, {r}) for n={n}")


@dataclass
class SpaceReport:
    """Bit counts per component; the second level is split into offsets and values."""

    variant: str
    n: int
    backend_bits: int = 0
    sparse_table_bits: int = 0
    second_level_bits: int = 0
    second_level_value_bits: int = 0
    params: dict = field(default_factory=dict)

    @property
    def total_bits(self) -> int:
        return (self.backend_bits + self.sparse_table_bits
                + self.second_level_bits + self.second_level_value_bits)

    @property
    def bits_per_element(self) -> float:
        return self.total_bits / self.n

    def per_element(self) -> dict[str, float]:
        n = self.n
        return {
            "backend": self.backend_bits / n,
            "sparse_table": self.sparse_table_bits / n,
            "second_level": (self.second_level_bits + self.second_level_value_bits) / n,
            "total": self.bits_per_element,
        }


# ---------------------------------------------------------------------------
# oracle


def rmq_scan(values: np.ndarray, l: int, r: int) -> int:
    """Leftmost position of the minimum of ``values[l..r]``."""
    check_range(len(values), l, r)
    return l + int(np.argmin(values[l:r + 1]))


def rmq_scan_batch(values: np.ndarray, batch: QueryBatch) -> np.ndarray:
    out = np.empty(batch.q, dtype=np.int64)
    for t, (l, r) in enumerate(zip(batch.ls.tolist(), batch.rs.tolist())):
        out[t] = rmq_scan(values, l, r)
    return out


def validate_answer(values: np.ndarray, l: int, r: int, pos: int) -> bool:
    """True iff ``pos`` lies in ``[l, r]`` and holds the range minimum (any tie)."""
    if not l <= pos <= r:
        return False
    return values[pos] == values[l:r + 1].min()


def count_mismatches(values: np.ndarray, batch: QueryBatch, answers: np.ndarray,
                     expected: np.ndarray | None = None) -> int:
    """Number of answers whose value differs from the oracle's (or lies outside its range)."""
    if expected is None:
        expected = rmq_scan_batch(values, batch)
    answers = np.asarray(answers, dtype=np.int64)
    outside = (answers < batch.ls) | (answers > batch.rs)
    safe = np.where(outside, batch.ls, answers)
    wrong = values[safe] != values[expected]
    return int(np.count_nonzero(outside | wrong))


# ---------------------------------------------------------------------------
# generators


def generate_array(n: int, seed: int) -> np.ndarray:
    """``n`` uniform random unsigned 32-bit values."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    rng = np.random.default_rng(seed)
    return rng.integers(0, 2**32, size=n, dtype=np.uint64).astype(np.uint32)


def generate_queries(n: int, q: int, max_width: int, seed: int) -> QueryBatch:
    """Left ends uniform over the array, widths uniform over ``[1, max_width]``.

    The right end is clipped at ``n - 1``.
    """
    if q < 1:
        raise ParameterError("q must be >= 1")
    if not 1 <= max_width <= n:
        raise ParameterError(f"max_width must be in [1, n={n}]")
    rng = np.random.default_rng(seed)
    ls = rng.integers(0, n, size=q, dtype=np.int64)
    widths = rng.integers(1, max_width + 1, size=q, dtype=np.int64)
    rs = np.minimum(ls + widths - 1, n - 1)
    return QueryBatch(ls, rs, max_width)


def generate_fixed_width_queries(n: int, q: int, width: int, seed: int) -> QueryBatch:
    """Queries of exactly ``width`` elements with uniformly placed left ends."""
    if q < 1:
        raise ParameterError("q must be >= 1")
    if not 1 <= width <= n:
        raise ParameterError(f"width must be in [1, n={n}]")
    rng = np.random.default_rng(seed)
    ls = rng.integers(0, n - width + 1, size=q, dtype=np.int64)
    return QueryBatch(ls, ls + width - 1, width)


# ---------------------------------------------------------------------------
# file formats


def write_array(path: str | Path, values: np.ndarray) -> None:
    """Raw little-endian uint32, no header."""
    np.asarray(values, dtype="<u4").tofile(path)


def read_array(path: str | Path) -> np.ndarray:
    data = np.fromfile(path, dtype="<u4")
    return as_input_array(data.astype(np.uint32))


def write_queries(path: str | Path, batch: QueryBatch) -> None:
    """Text ``"l r"`` lines, or little-endian uint64 pairs for ``.qbin`` files."""
    path = Path(path)
    if path.suffix == ".qbin":
        np.column_stack([batch.ls, batch.rs]).astype("<u8").tofile(path)
        return
    with path.open("w") as fh:
        for l, r in zip(batch.ls.tolist(), batch.rs.tolist()):
            fh.write(f"{l} {r}\n")


def read_queries(path: str | Path) -> QueryBatch:
    path = Path(path)
    if path.suffix == ".qbin":
        raw = np.fromfile(path, dtype="<u8")
        if raw.size % 2:
            raise ParameterError(f"{path}: odd number of uint64 values")
        pairs = raw.reshape(-1, 2).astype(np.int64)
        return QueryBatch(pairs[:, 0], pairs[:, 1])
    text = path.read_text().split()
    if len(text) % 2:
        raise ParameterError(f"{path}: expected 'l r' pairs")
    pairs = np.array(text, dtype=np.int64).reshape(-1, 2)
    return QueryBatch(pairs[:, 0], pairs[:, 1])


def write_answers(path: str | Path, answers: np.ndarray, binary: bool = False) -> None:
    """One position per line, or little-endian uint64 when ``binary``."""
    answers = np.asarray(answers)
    if binary:
        answers.astype("<u8").tofile(path)
    else:
        np.savetxt(path, answers, fmt="%d")


def run_chunked(func, q: int, threads: int = 1) -> None:
    """Call ``func(sl)`` on contiguous slices of ``range(q)``.

    Each call must write only its own slice of preallocated outputs, so the
    result does not depend on ``threads``. The kernels release the GIL.
    """
    if threads <= 1 or q < 2:
        func(slice(0, q))
        return
    from concurrent.futures import ThreadPoolExecutor

    parts = min(threads, q)
    edges = np.linspace(0, q, parts + 1).astype(int)
    slices = [slice(a, b) for a, b in zip(edges[:-1], edges[1:])]
    with ThreadPoolExecutor(max_workers=parts) as pool:
        list(pool.map(func, slices))
