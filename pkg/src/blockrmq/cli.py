"""Command-line harness: data generation, verification, space reports and benchmarks.

Seeds: the array uses ``--seed``, generated queries use ``--seed + 1`` (and
``--seed + 1 + i`` for the i-th width of a sweep).
"""

from __future__ import annotations

import argparse
import csv
import statistics
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    ParameterError,
    RangeError,
    count_mismatches,
    generate_array,
    generate_queries,
    read_array,
    read_queries,
    write_answers,
    write_array,
    write_queries,
)
from .hybrid import FRONTS
from .variants import VARIANTS, Params, Variant, space_report

BENCH_COLUMNS = ["variant", "n", "k1", "k2", "max_width", "q", "median_ns_per_query",
                 "success_rate", "fallback_rate", "bits_per_element"]
SPACE_COLUMNS = ["variant", "n", "k1", "k2", "mode", "backend_bits", "sparse_table_bits",
                 "second_level_bits", "second_level_value_bits", "total_bits",
                 "backend_bpe", "sparse_table_bpe", "second_level_bpe", "bits_per_element"]
DEFAULT_SWEEP = [4**e for e in range(3, 13)]  # 2^6 .. 2^24
DESK_CAP = 10**7


class UsageError(Exception):
    pass


@dataclass
class BenchConfig:
    variant: str
    n: int
    params: Params
    q: int
    max_widths: list[int]
    seed: int = 0
    reps: int = 7
    threads: int = 1
    out: str | None = None

    def __post_init__(self):
        if self.reps < 1 or self.reps % 2 == 0:
            raise ParameterError("--reps must be odd and >= 1 so the median is a sample")


@dataclass
class VerifyResult:
    variant: str
    n: int
    q: int
    mismatches: int
    success_rate: float
    fallback_rate: float
    contracted: int | None = None

    @property
    def passed(self) -> bool:
        return self.mismatches == 0

    def line(self) -> str:
        s = (f"variant={self.variant} n={self.n} q={self.q} mismatches={self.mismatches} "
             f"success_rate={self.success_rate:.6f} fallback_rate={self.fallback_rate:.6f}")
        if self.contracted is not None:
            s += f" contracted={self.contracted}"
        return s + (" PASS" if self.passed else " FAIL")


def cmd_space_report(variant: str, n: int, params: Params, q: int | None = None,
                     backend_bits_per_element: float | None = None) -> dict:
    rep = space_report(variant, n, params, q, backend_bits_per_element)
    k1, k2 = params.columns(variant)
    per = rep.per_element()
    return {
        "variant": rep.variant, "n": n, "k1": k1, "k2": k2, "mode": params.mode,
        "backend_bits": rep.backend_bits, "sparse_table_bits": rep.sparse_table_bits,
        "second_level_bits": rep.second_level_bits,
        "second_level_value_bits": rep.second_level_value_bits,
        "total_bits": rep.total_bits,
        "backend_bpe": per["backend"], "sparse_table_bpe": per["sparse_table"],
        "second_level_bpe": per["second_level"], "bits_per_element": rep.bits_per_element,
    }


def cmd_verify(variant: str, n: int, params: Params, q: int, max_width: int, seed: int,
               threads: int = 1, max_n: int = DESK_CAP) -> VerifyResult:
    if n > max_n:
        raise UsageError(f"n={n} exceeds the desk-scale cap {max_n}")
    values = generate_array(n, seed)
    batch = generate_queries(n, q, min(max_width, n), seed + 1)
    runner = Variant(variant, values, params)
    out = runner.answer(batch, threads)
    return VerifyResult(variant, n, q, count_mismatches(values, batch, out.positions),
                        out.success_rate, out.fallback_rate, out.extra.get("contracted"))


def cmd_bench(config: BenchConfig) -> list[dict]:
    values = generate_array(config.n, config.seed)
    runner = Variant(config.variant, values, config.params)
    k1, k2 = config.params.columns(config.variant)
    rows = []
    for i, width in enumerate(config.max_widths):
        batch = generate_queries(config.n, config.q, min(width, config.n), config.seed + 1 + i)
        times = []
        for _ in range(config.reps):
            t0 = time.perf_counter()
            out = runner.answer(batch, config.threads)
            times.append(time.perf_counter() - t0)
        rows.append({
            "variant": config.variant, "n": config.n, "k1": k1, "k2": k2,
            "max_width": width, "q": config.q,
            "median_ns_per_query": round(statistics.median(times) / config.q * 1e9, 1),
            "success_rate": round(out.success_rate, 6),
            "fallback_rate": round(out.fallback_rate, 6),
            "bits_per_element": round(runner.space_report(out).bits_per_element, 6),
        })
    return rows


def _write_csv(path, columns, rows) -> None:
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if path:
            fh.close()


def _params(args) -> Params:
    return Params(k=args.k, k1=args.k1, k2=args.k2, arity=args.arity, mode=args.mode,
                  front=args.front, sorter=args.sorter)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=10**6)
    common.add_argument("--k", type=int)
    common.add_argument("--k1", type=int)
    common.add_argument("--k2", type=int)
    common.add_argument("--variant", choices=VARIANTS, default="bbst")
    common.add_argument("--front", choices=FRONTS, default="cbbst2",
                        help="front end of the hybrid variant")
    common.add_argument("--arity", type=int, default=2)
    common.add_argument("--mode", choices=("byte", "bit"), default="byte")
    common.add_argument("--sorter", choices=("radix", "comparison"), default="radix")
    common.add_argument("--q", type=int, default=10**5)
    common.add_argument("--max-width", type=int, nargs="+")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--reps", type=int, default=7)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out")
    common.add_argument("--array")
    common.add_argument("--queries")

    parser = argparse.ArgumentParser(prog="blockrmq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gen-array", parents=[common], help="write a random uint32 array")
    sub.add_parser("gen-queries", parents=[common], help="write a random query batch")
    verify = sub.add_parser("verify", parents=[common], help="compare a variant against the scan oracle")
    verify.add_argument("--max-n", type=int, default=DESK_CAP)
    sub.add_parser("bench", parents=[common], help="median-of-runs timings per max width, as CSV")
    space = sub.add_parser("space", parents=[common], help="space arithmetic per component, as CSV")
    space.add_argument("--backend-bpe", type=float,
                       help="hybrid backend bits per element instead of the reference sparse table")
    offline = sub.add_parser("offline", parents=[common], help="answer a batch offline")
    offline.add_argument("--binary", action="store_true", help="answers as little-endian uint64")
    return parser


def _load_batch(args, n):
    if args.queries:
        return read_queries(args.queries)
    width = args.max_width[0] if args.max_width else n
    return generate_queries(n, args.q, min(width, n), args.seed + 1)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ParameterError, RangeError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    params = _params(args)
    if args.command == "gen-array":
        if not args.out:
            raise UsageError("--out is required")
        write_array(args.out, generate_array(args.n, args.seed))
        return 0

    if args.command == "gen-queries":
        if not args.out:
            raise UsageError("--out is required")
        width = args.max_width[0] if args.max_width else args.n
        write_queries(args.out, generate_queries(args.n, args.q, width, args.seed + 1))
        return 0

    if args.command == "space":
        row = cmd_space_report(args.variant, args.n, params, args.q, args.backend_bpe)
        _write_csv(args.out, SPACE_COLUMNS, [row])
        if args.out:
            print(f"{row['variant']}: {row['bits_per_element']:.4f} bits/element "
                  f"(sparse table {row['sparse_table_bpe']:.4f}, "
                  f"second level {row['second_level_bpe']:.4f})")
        return 0

    if args.command == "verify":
        widths = args.max_width or [args.n]
        ok = True
        for width in widths:
            res = cmd_verify(args.variant, args.n, params, args.q, width, args.seed,
                             args.threads, args.max_n)
            print(res.line())
            ok &= res.passed
        return 0 if ok else 1

    if args.command == "bench":
        widths = args.max_width or [w for w in DEFAULT_SWEEP if w <= args.n]
        config = BenchConfig(args.variant, args.n, params, args.q, widths, args.seed,
                             args.reps, args.threads, args.out)
        _write_csv(config.out, BENCH_COLUMNS, cmd_bench(config))
        return 0

    if args.command == "offline":
        if args.variant not in ("offline-con", "offline-plain"):
            raise UsageError("offline needs --variant offline-con or offline-plain")
        values = read_array(args.array) if args.array else generate_array(args.n, args.seed)
        batch = _load_batch(args, len(values))
        batch.validate(len(values))
        out = Variant(args.variant, values, params).answer(batch, args.threads)
        if args.out:
            write_answers(args.out, out.positions, binary=args.binary)
        else:
            np.savetxt(sys.stdout, out.positions, fmt="%d")
        summary = f"q={batch.q} fallback_rate={out.fallback_rate:.6f}"
        if "contracted" in out.extra:
            summary += f" contracted={out.extra['contracted']}"
            stages = " ".join(f"{k}={v * 1e3:.3f}ms" for k, v in out.extra["stages"].items())
            print(f"stages: {stages}", file=sys.stderr)
        print(summary, file=sys.stderr)
        return 0
    raise UsageError(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
