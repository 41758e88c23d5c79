"""Permutations, partial colourings, black-peg feedback and 0-query counting.

Positions and colours are 1-indexed everywhere a caller can see them.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import CutoffExceeded, DomainMismatch, InvalidV, NotABijection, OutOfRange, SizeMismatch

DEFAULT_CUTOFF = 8
DEFAULT_TRIPLE_CUTOFF = 5
CUTOFF_ENV = "PMM_CUTOFF"


def _env_cutoff() -> int | None:
    raw = os.environ.get(CUTOFF_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise OutOfRange(f"{CUTOFF_ENV} must be an integer, got {raw!r}") from None


def exhaustive_cutoff(override: int | None = None) -> int:
    """Largest n for which full enumeration of S_n is allowed."""
    if override is not None:
        return override
    env = _env_cutoff()
    return DEFAULT_CUTOFF if env is None else env


def triple_cutoff(override: int | None = None) -> int:
    if override is not None:
        return override
    env = _env_cutoff()
    return DEFAULT_TRIPLE_CUTOFF if env is None else env


@dataclass(frozen=True)
class Permutation:
    """A bijection on 1..n, stored as the tuple of its values."""

    n: int
    values: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise OutOfRange(f"n must be >= 1, got {self.n}")
        if len(self.values) != self.n:
            raise SizeMismatch(f"expected {self.n} values, got {len(self.values)}")
        if sorted(self.values) != list(range(1, self.n + 1)):
            raise NotABijection(f"{list(self.values)} is not a permutation of 1..{self.n}")

    @classmethod
    def _trusted(cls, values: tuple[int, ...]) -> Permutation:
        # skips validation; callers guarantee a bijection on 1..len(values)
        obj = object.__new__(cls)
        object.__setattr__(obj, "n", len(values))
        object.__setattr__(obj, "values", values)
        return obj

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return make_permutation(n, range(1, n + 1))

    def __call__(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise OutOfRange(f"position {i} outside 1..{self.n}")
        return self.values[i - 1]

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return self.n

    def __str__(self):
        return " ".join(map(str, self.values))

    def restrict(self, positions: Iterable[int]) -> PartialColouring:
        return PartialColouring(self.n, {i: self(i) for i in positions})


def make_permutation(n: int, values: Iterable[int]) -> Permutation:
    return Permutation(n, tuple(int(x) for x in values))


def parse_permutation(text: str, n: int | None = None) -> Permutation:
    """Parse the space-separated 1-indexed syntax used in files and on the command line."""
    try:
        values = tuple(int(tok) for tok in text.split())
    except ValueError:
        raise NotABijection(f"non-integer entry in {text!r}") from None
    if n is None:
        n = len(values)
    if len(values) != n:
        raise SizeMismatch(f"expected {n} values, got {len(values)}")
    return Permutation(n, values)


@dataclass(frozen=True)
class PartialColouring:
    """Colours assigned to a subset I of positions. Not necessarily injective."""

    n: int
    assignments: tuple[tuple[int, int], ...]

    def __init__(self, n: int, assignments: Mapping[int, int] | Iterable[tuple[int, int]]):
        pairs = assignments.items() if isinstance(assignments, Mapping) else assignments
        pairs = tuple(sorted((int(i), int(col)) for i, col in pairs))
        if n < 1:
            raise OutOfRange(f"n must be >= 1, got {n}")
        seen = set()
        for i, col in pairs:
            if not (1 <= i <= n and 1 <= col <= n):
                raise OutOfRange(f"assignment {i}->{col} outside 1..{n}")
            if i in seen:
                raise DomainMismatch(f"position {i} assigned twice")
            seen.add(i)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "assignments", pairs)

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.assignments)

    @property
    def colours(self) -> tuple[int, ...]:
        return tuple(col for _, col in self.assignments)

    @cached_property
    def is_valid(self) -> bool:
        cols = self.colours
        return len(set(cols)) == len(cols)

    def __getitem__(self, i: int) -> int:
        for pos, col in self.assignments:
            if pos == i:
                return col
        raise KeyError(i)

    def __len__(self):
        return len(self.assignments)

    def as_dict(self) -> dict[int, int]:
        return dict(self.assignments)


def _check_sizes(a: int, b: int) -> None:
    if a != b:
        raise SizeMismatch(f"n={a} does not match n={b}")


def black_pegs(query: Permutation, codeword: Permutation) -> int:
    _check_sizes(query.n, codeword.n)
    return sum(q == c for q, c in zip(query.values, codeword.values))


def is_zero_query(sigma: Permutation, c: PartialColouring) -> bool:
    """True iff sigma disagrees with c on every assigned position."""
    _check_sizes(sigma.n, c.n)
    vals = sigma.values
    return all(vals[i - 1] != col for i, col in c.assignments)


def discriminates(sigma: Permutation, v: PartialColouring, c: PartialColouring) -> bool:
    """True iff sigma is a 0-query for the valid colouring v but not for c."""
    _check_sizes(sigma.n, v.n)
    _check_sizes(v.n, c.n)
    if v.positions != c.positions:
        raise DomainMismatch(f"v on {v.positions} but c on {c.positions}")
    if not v.is_valid:
        raise InvalidV(f"v={v.as_dict()} repeats a colour")
    return is_zero_query(sigma, v) and not is_zero_query(sigma, c)


def count_zero_queries_formula(n: int, m: int) -> int:
    """Number of permutations of 1..n avoiding a fixed valid colouring of m positions.

    Sum over k of (-1)^k C(m, k) (n-k)!, in exact integers.
    """
    if n < 1:
        raise OutOfRange(f"n must be >= 1, got {n}")
    if not 0 <= m <= n:
        raise OutOfRange(f"m={m} outside 0..{n}")
    return sum((-1) ** k * math.comb(m, k) * math.factorial(n - k) for k in range(m + 1))


def enumerate_permutations(n: int, cutoff: int | None = None) -> Iterator[Permutation]:
    """Yield every permutation of 1..n once, in lexicographic order."""
    if n < 1:
        raise OutOfRange(f"n must be >= 1, got {n}")
    limit = exhaustive_cutoff(cutoff)
    if n > limit:
        raise CutoffExceeded(n, limit)
    for values in itertools.permutations(range(1, n + 1)):
        yield Permutation._trusted(values)


@lru_cache(maxsize=4)
def _all_permutations_array(n: int) -> np.ndarray:
    arr = np.array(list(itertools.permutations(range(1, n + 1))), dtype=np.int8)
    arr.setflags(write=False)
    return arr


def permutation_array(n: int, cutoff: int | None = None) -> np.ndarray:
    """All of S_n as a read-only (n!, n) array of 1-indexed colours, rows in lexicographic order."""
    if n < 1:
        raise OutOfRange(f"n must be >= 1, got {n}")
    limit = exhaustive_cutoff(cutoff)
    if n > limit:
        raise CutoffExceeded(n, limit)
    return _all_permutations_array(n)


def as_array(perms: Sequence[Permutation], n: int) -> np.ndarray:
    if not perms:
        return np.zeros((0, n), dtype=np.int16)
    return np.array([p.values for p in perms], dtype=np.int16)
