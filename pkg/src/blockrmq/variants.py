"""Uniform construction/answering of every shipped variant, for the CLI and tests."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bbst import INPUT_BITS, BbstIndex, bbst_space_bits, sparse_layer_bits
from .bbst2 import Bbst2Index, bbst2_space_bits
from .compact import CompactIndex, cbbst_space_bits
from .core import ParameterError, QueryBatch, SpaceReport
from .hybrid import HybridIndex, hybrid_space_bits
from .offline import DEFAULT_K, OfflinePipeline, answer_batch_plain, default_plain_k
from .sparse_table import SparseTable, st_space_bits

VARIANTS = ("st", "bbst", "bbst2", "cbbst", "cbbst2", "hybrid", "offline-con", "offline-plain")
TWO_LEVEL_DEFAULTS = {"bbst2": (512, 64), "cbbst2": (16384, 256), "hybrid": (16384, 256)}


@dataclass
class Params:
    k: int | None = None
    k1: int | None = None
    k2: int | None = None
    arity: int = 2
    mode: str = "byte"
    front: str = "cbbst2"
    sorter: str = "radix"

    def block_sizes(self, variant: str) -> tuple[int, int]:
        """(k1, k2) for two-level variants; ``--k`` stands in for ``--k1``."""
        d1, d2 = TWO_LEVEL_DEFAULTS.get(variant, (DEFAULT_K, 64))
        k1 = self.k1 or self.k or d1
        return k1, self.k2 or d2

    def columns(self, variant: str) -> tuple[int, int]:
        """Values of the CSV ``k1``/``k2`` columns."""
        if variant == "st":
            return self.arity, 0
        if variant in ("bbst2", "cbbst2") or (variant == "hybrid" and self.front.endswith("2")):
            return self.block_sizes(variant)
        if variant == "offline-plain":
            return self.k or 0, 0
        return self.k or self.k1 or DEFAULT_K, 0


@dataclass
class Outcome:
    positions: np.ndarray
    success_rate: float
    fallback_rate: float
    extra: dict = field(default_factory=dict)


class Variant:
    """Builds one structure over ``values`` and answers batches with path statistics."""

    def __init__(self, name: str, values: np.ndarray, params: Params):
        if name not in VARIANTS:
            raise ParameterError(f"unknown variant {name!r}; choose from {VARIANTS}")
        self.name = name
        self.values = values
        self.params = params
        self.n = len(values)
        p = params
        k = p.k or DEFAULT_K
        if name == "st":
            self.index = SparseTable(values, p.arity)
        elif name == "bbst":
            self.index = BbstIndex(values, k)
        elif name == "bbst2":
            self.index = Bbst2Index(values, *p.block_sizes(name))
        elif name == "cbbst":
            self.index = CompactIndex(values, k, p.mode)
        elif name == "cbbst2":
            k1, k2 = p.block_sizes(name)
            self.index = CompactIndex(values, k1, p.mode, k2)
        elif name == "hybrid":
            if p.front.endswith("2"):
                k1, k2 = p.block_sizes(name)
            else:
                k1, k2 = k, None
            self.index = HybridIndex(values, p.front, k1, k2, p.mode)
        else:
            self.index = None

    def answer(self, batch: QueryBatch, threads: int = 1) -> Outcome:
        name, p = self.name, self.params
        if name == "st":
            return Outcome(self.index.query_batch(batch, threads), 1.0, 0.0)
        if name == "hybrid":
            res = self.index.query_batch(batch, threads)
            rate = res.front_rate
            return Outcome(res.positions, rate, 1.0 - rate)
        if name == "offline-con":
            res = OfflinePipeline(p.k or DEFAULT_K, p.sorter, threads).run(self.values, batch)
            return Outcome(res.positions, 1.0 - res.fallback_rate, res.fallback_rate,
                           {"contracted": res.contracted_size, "stages": res.stage_seconds})
        if name == "offline-plain":
            res = answer_batch_plain(self.values, batch, p.k, threads)
            return Outcome(res.positions, 1.0 - res.fallback_rate, res.fallback_rate)
        res = self.index.query_batch(self.values, batch, threads)
        return Outcome(res.positions, 1.0 - res.fallback_rate, res.fallback_rate)

    def space_report(self, outcome: Outcome | None = None) -> SpaceReport:
        if self.name in ("offline-con", "offline-plain"):
            cells = outcome.extra.get("contracted") if outcome else None
            return offline_space(self.name, self.n, self.params, cells)
        return self.index.space_report() if self.name != "st" else SpaceReport(
            "st", self.n, sparse_table_bits=self.index.space_bits(), params={"arity": self.params.arity})


def offline_space(variant: str, n: int, params: Params, cells: int | None = None,
                  q: int | None = None) -> SpaceReport:
    """Offline variants: input array plus the structure built for one batch.

    The contracted variant stores one 32-bit value and one 32-bit position per
    cell; without a measured cell count, ``2q - 1`` cells are assumed.
    """
    if variant == "offline-plain":
        k = params.k or default_plain_k(n)
        rep = bbst_space_bits(n, k)
        rep.variant = variant
        return rep
    if cells is None:
        if q is None:
            raise ParameterError("offline-con space needs q")
        cells = max(0, 2 * q - 1)
    k = min(params.k or DEFAULT_K, max(cells, 1))
    table = sparse_layer_bits(cells, k) if cells else 0
    return SpaceReport(variant, n, backend_bits=INPUT_BITS * n,
                       sparse_table_bits=table + 64 * cells, params={"k": k, "cells": cells})


def space_report(variant: str, n: int, params: Params, q: int | None = None,
                 backend_bits_per_element: float | None = None) -> SpaceReport:
    """Pure arithmetic; nothing is allocated."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    k = params.k or DEFAULT_K
    if variant == "st":
        return SpaceReport("st", n, sparse_table_bits=st_space_bits(n, params.arity),
                           params={"arity": params.arity})
    if variant == "bbst":
        return bbst_space_bits(n, k)
    if variant == "bbst2":
        return bbst2_space_bits(n, *params.block_sizes(variant))
    if variant == "cbbst":
        return cbbst_space_bits(n, k, params.mode)
    if variant == "cbbst2":
        k1, k2 = params.block_sizes(variant)
        return cbbst_space_bits(n, k1, params.mode, k2, "quantized")
    if variant == "hybrid":
        if params.front.endswith("2"):
            k1, k2 = params.block_sizes(variant)
        else:
            k1, k2 = k, None
        return hybrid_space_bits(n, params.front, k1, k2, params.mode, backend_bits_per_element)
    if variant in ("offline-con", "offline-plain"):
        return offline_space(variant, n, params, q=q)
    raise ParameterError(f"unknown variant {variant!r}; choose from {VARIANTS}")
