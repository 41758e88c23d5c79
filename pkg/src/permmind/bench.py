"""Empirical success rate of random query sets of size ceil(c n ln n)."""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Sequence

from .bounds import required_query_count
from .decoder import round_trip_check
from .querygen import Rng, derive_seed, generate_query_set, random_permutation

CSV_COLUMNS = ("n", "c", "query_count", "trials", "success_rate", "wall_ms")


@dataclass(frozen=True)
class BenchRow:
    n: int
    c: Fraction
    query_count: int
    trials: int
    successes: int
    wall_ms: float

    @property
    def success_rate(self) -> Fraction:
        return Fraction(self.successes, self.trials)

    def csv_fields(self) -> list[str]:
        return [str(self.n), str(self.c), str(self.query_count), str(self.trials),
                repr(float(self.success_rate)), f"{self.wall_ms:.3f}"]


def block_seed(seed: int, n: int, c: Fraction, block: int) -> int:
    """Seed of the query set used for one block of trials in cell (n, c)."""
    return derive_seed(seed, n, c.numerator, c.denominator, block)


def run_cell(n: int, c, trials: int, seed: int, block: int = 20) -> BenchRow:
    """Round-trip ``trials`` random codewords, drawing a fresh query set every ``block`` trials."""
    c = Fraction(c)
    count = required_query_count(n, c)
    start = time.perf_counter()
    successes = 0
    done = 0
    b = 0
    while done < trials:
        qseed = block_seed(seed, n, c, b)
        Q = generate_query_set(n, count, qseed)
        rng = Rng(qseed, 1)
        for _ in range(min(block, trials - done)):
            successes += round_trip_check(Q, random_permutation(n, rng))
            done += 1
        b += 1
    wall = (time.perf_counter() - start) * 1000
    return BenchRow(n, c, count, trials, successes, wall)


def run_bench(n_list: Sequence[int], c_list: Sequence, trials: int, seed: int,
              block: int = 20, workers: int = 1) -> list[BenchRow]:
    """One row per (n, c), ordered by n_list then c_list whatever the completion order."""
    cells = [(n, Fraction(c)) for n in n_list for c in c_list]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            futures = [pool.submit(run_cell, n, c, trials, seed, block) for n, c in cells]
            return [f.result() for f in futures]
    return [run_cell(n, c, trials, seed, block) for n, c in cells]


def write_csv(rows: Sequence[BenchRow], sink: IO[str]) -> None:
    w = csv.writer(sink, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow(row.csv_fields())
