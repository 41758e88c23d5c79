"""Seeded uniform permutations, static query sets and the query-set file format.

Generator ``pcg64-fy``: numpy's PCG64 bit generator seeded through
``SeedSequence(entropy=seed, spawn_key=key)``, consumed one raw 64-bit word
at a time.  Bounded integers in ``[0, b)`` reject words at or above the
largest multiple of ``b`` below 2**64 and return ``word % b``.  Permutations
come from the decreasing-index exchange shuffle of ``[1..n]``: for
``i = n-1 .. 1`` swap slot ``i`` with slot ``bounded(i + 1)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Sequence

import numpy as np

from .core import Permutation, as_array
from .errors import OutOfRange, ParseError, SizeMismatch

GENERATOR_ID = "pcg64-fy"
AUTO = "auto"

_TWO64 = 1 << 64
_CHUNK = 4096


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < _TWO64:
        raise OutOfRange(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


class Rng:
    """Deterministic single-owner random stream; not safe to share between tasks.

    ``Rng(seed, *key)`` selects the substream ``key`` of ``seed``; parallel
    work uses ``Rng(seed, task_index)`` so streams never overlap.
    """

    algorithm_id = GENERATOR_ID

    def __init__(self, seed: int, *key: int):
        self.seed = _check_seed(seed)
        self.key = tuple(int(k) for k in key)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        self._bitgen = np.random.PCG64(ss)
        self._buf: list[int] = []
        self._pos = 0

    def next_u64(self) -> int:
        if self._pos == len(self._buf):
            self._buf = self._bitgen.random_raw(_CHUNK).tolist()
            self._pos = 0
        x = self._buf[self._pos]
        self._pos += 1
        return x

    def bounded(self, bound: int) -> int:
        """Uniform integer in [0, bound) without modulo bias."""
        if bound < 1:
            raise OutOfRange(f"bound must be >= 1, got {bound}")
        if bound == 1:
            return 0
        limit = _TWO64 - _TWO64 % bound
        x = self.next_u64()
        while x >= limit:
            x = self.next_u64()
        return x % bound

    def shuffle(self, items: list) -> list:
        for i in range(len(items) - 1, 0, -1):
            j = self.bounded(i + 1)
            items[i], items[j] = items[j], items[i]
        return items


def derive_seed(seed: int, *key: int) -> int:
    """A 64-bit seed for the substream ``key`` of ``seed``; recorded in outputs for reruns."""
    ss = np.random.SeedSequence(entropy=_check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def random_permutation(n: int, rng: Rng) -> Permutation:
    if n < 1:
        raise OutOfRange(f"n must be >= 1, got {n}")
    return Permutation._trusted(tuple(rng.shuffle(list(range(1, n + 1)))))


@dataclass(frozen=True)
class QuerySet:
    n: int
    queries: tuple[Permutation, ...]
    seed: int | None = None
    generator_id: str = GENERATOR_ID

    def __post_init__(self):
        object.__setattr__(self, "queries", tuple(self.queries))
        for q in self.queries:
            if q.n != self.n:
                raise SizeMismatch(f"query of size {q.n} in a set with n={self.n}")
        if self.seed is not None:
            _check_seed(self.seed)

    def __len__(self):
        return len(self.queries)

    def __iter__(self):
        return iter(self.queries)

    @cached_property
    def array(self) -> np.ndarray:
        """Queries as a read-only (count, n) array of 1-indexed colours."""
        arr = as_array(self.queries, self.n)
        arr.setflags(write=False)
        return arr

    @cached_property
    def zero_based(self) -> np.ndarray:
        arr = self.array.astype(np.int64) - 1
        arr.setflags(write=False)
        return arr

    @cached_property
    def position_index(self) -> tuple[np.ndarray, np.ndarray]:
        """Inverse index: ``order[i, starts[i, c]:starts[i, c + 1]]`` lists the queries with colour c+1 at position i+1."""
        cols = np.ascontiguousarray(self.zero_based.T)
        order = np.argsort(cols, axis=1, kind="stable")
        sorted_cols = np.take_along_axis(cols, order, axis=1)
        starts = np.stack([np.searchsorted(row, np.arange(self.n + 1)) for row in sorted_cols]) \
            if self.n else np.zeros((0, 1), dtype=np.int64)
        order.setflags(write=False)
        starts.setflags(write=False)
        return order, starts

    def extended(self, more: Sequence[Permutation]) -> QuerySet:
        return QuerySet(self.n, self.queries + tuple(more), None, self.generator_id)

    def deduplicated(self) -> QuerySet:
        """Drop repeated queries, keeping first occurrences.  Never applied implicitly."""
        seen = dict.fromkeys(self.queries)
        return QuerySet(self.n, tuple(seen), self.seed, self.generator_id + "+dedup")


def generate_query_set(n: int, count: int | str = AUTO, seed: int = 0) -> QuerySet:
    """Sample ``count`` permutations independently and uniformly, with replacement."""
    from .bounds import required_query_count

    if n < 2:
        raise OutOfRange(f"n must be >= 2, got {n}")
    if count == AUTO or count is None:
        count = required_query_count(n)
    count = int(count)
    if count < 1:
        raise OutOfRange(f"count must be positive, got {count}")
    rng = Rng(seed)
    base = list(range(1, n + 1))
    queries = tuple(Permutation._trusted(tuple(rng.shuffle(base[:]))) for _ in range(count))
    return QuerySet(n, queries, rng.seed, GENERATOR_ID)


# --- file format -----------------------------------------------------------

_HEADER = re.compile(r"^PMM v1 n=(\d+) count=(\d+) seed=(\d+|none) gen=(\S+)$")


def write_query_set(q: QuerySet, sink: IO[bytes]) -> None:
    seed = "none" if q.seed is None else str(q.seed)
    lines = [f"PMM v1 n={q.n} count={len(q)} seed={seed} gen={q.generator_id}"]
    lines.extend(str(p) for p in q.queries)
    sink.write(("\n".join(lines) + "\n").encode("ascii"))


def _parse_row(text: str, n: int, lineno: int) -> tuple[int, ...]:
    toks = text.split(" ")
    if len(toks) != n:
        raise ParseError(lineno, f"expected {n} entries, got {len(toks)}")
    try:
        values = tuple(int(t) for t in toks)
    except ValueError:
        raise ParseError(lineno, f"non-integer entry in {text!r}") from None
    if sorted(values) != list(range(1, n + 1)):
        raise ParseError(lineno, f"not a permutation of 1..{n}: {text!r}")
    return values


def read_query_set(source: IO[bytes]) -> QuerySet:
    try:
        text = source.read().decode("ascii")
    except UnicodeDecodeError as exc:
        raise ParseError(1, f"non-ASCII content ({exc.reason})") from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError(1, "empty file")
    m = _HEADER.match(lines[0])
    if not m:
        raise ParseError(1, f"bad header {lines[0]!r}")
    n, count = int(m.group(1)), int(m.group(2))
    seed = None if m.group(3) == "none" else int(m.group(3))
    if n < 1:
        raise ParseError(1, "n must be >= 1")
    if seed is not None and seed >= _TWO64:
        raise ParseError(1, "seed exceeds 64 bits")
    body = lines[1:]
    if len(body) != count:
        raise ParseError(len(lines) + (1 if len(body) < count else 0),
                         f"header declares count={count} but file has {len(body)} query lines")
    queries = tuple(Permutation._trusted(_parse_row(row, n, k + 2)) for k, row in enumerate(body))
    return QuerySet(n, queries, seed, m.group(4))
