"""Finite, exactly checkable forms of the counting inequalities behind the query-set lemma.

Every inequality here is paired with brute-force enumeration over S_n.
Asymptotic statements (the o(1) terms and the |I|/(7n) discrimination rate
that only holds for large n) are computed and reported, never asserted.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .core import (
    PartialColouring,
    count_zero_queries_formula,
    permutation_array,
)
from .errors import DomainMismatch, InvalidV, OutOfRange

LEMMA_CONSTANT = 28


@dataclass(frozen=True)
class TripleInstance:
    """A position set I, a valid colouring v of I, and a colouring c of I with c(i) != v(i)."""

    n: int
    I: tuple[int, ...]
    v: PartialColouring
    c: PartialColouring

    def __post_init__(self):
        object.__setattr__(self, "I", tuple(sorted(self.I)))
        if self.v.n != self.n or self.c.n != self.n:
            raise DomainMismatch("v, c and the triple disagree on n")
        if self.v.positions != self.I or self.c.positions != self.I:
            raise DomainMismatch(f"v and c must assign exactly the positions {self.I}")
        if not self.v.is_valid:
            raise InvalidV(f"v={self.v.as_dict()} repeats a colour")
        for (i, vc), (_, cc) in zip(self.v.assignments, self.c.assignments):
            if vc == cc:
                raise DomainMismatch(f"c({i}) == v({i}) == {vc}")

    @classmethod
    def from_lists(cls, n: int, I: Sequence[int], v: Sequence[int], c: Sequence[int]) -> TripleInstance:
        if not (len(I) == len(v) == len(c)):
            raise DomainMismatch("I, v and c must have equal length")
        return cls(n, tuple(I), PartialColouring(n, zip(I, v)), PartialColouring(n, zip(I, c)))

    def __str__(self):
        fmt = lambda xs: " ".join(map(str, xs))
        return f"{fmt(self.I)} | {fmt(self.v.colours)} | {fmt(self.c.colours)}"


def canonical_triple(n: int, m: int) -> TripleInstance:
    """I = {1..m}, v the identity on I, c(i) = i + 1 (mod n)."""
    if not 0 <= m <= n:
        raise OutOfRange(f"m={m} outside 0..{n}")
    I = list(range(1, m + 1))
    return TripleInstance.from_lists(n, I, I, [i % n + 1 for i in I])


def parse_triple(text: str, n: int) -> TripleInstance:
    """Parse ``"<I> | <v> | <c>"`` where each part is space-separated 1-indexed integers."""
    parts = text.split("|")
    if len(parts) != 3:
        raise DomainMismatch(f"expected 'I | v | c', got {text!r}")
    I, v, c = ([int(x) for x in part.split()] for part in parts)
    return TripleInstance.from_lists(n, I, v, c)


@dataclass(frozen=True)
class SetSizeReport:
    n: int
    m: int
    single: dict[int, int]
    pairwise: dict[tuple[int, int], int]
    union: int
    bonferroni_lower: int

    def lines(self, prefix: str = "") -> list[str]:
        out = [f"{prefix}n={self.n}", f"{prefix}m={self.m}"]
        out += [f"{prefix}S_{i}={s}" for i, s in self.single.items()]
        out += [f"{prefix}S_{i}&S_{j}={s}" for (i, j), s in self.pairwise.items()]
        out += [f"{prefix}union={self.union}", f"{prefix}bonferroni_lower={self.bonferroni_lower}"]
        return out


def check_claim_a(n: int, m: int) -> bool:
    """n!/3 <= A(n, m) <= n!, checked division-free."""
    a = count_zero_queries_formula(n, m)
    f = math.factorial(n)
    return f <= 3 * a and a <= f


def third_order_lower(n: int, m: int) -> int:
    """Inclusion-exclusion for A(n, m) truncated after k = 3; never exceeds A(n, m)."""
    if not 0 <= m <= n:
        raise OutOfRange(f"m={m} outside 0..{n}")
    return sum((-1) ** k * math.comb(m, k) * math.factorial(n - k) for k in range(min(m, 3) + 1))


def _s_masks(t: TripleInstance, cutoff: int | None) -> tuple[np.ndarray, dict[int, np.ndarray]]:
    perms = permutation_array(t.n, cutoff)
    zero = np.ones(len(perms), dtype=bool)
    for i, col in t.v.assignments:
        zero &= perms[:, i - 1] != col
    masks = {i: zero & (perms[:, i - 1] == col) for i, col in t.c.assignments}
    return zero, masks


def enumerate_set_sizes(t: TripleInstance, cutoff: int | None = None) -> SetSizeReport:
    """|S_i|, |S_i & S_j| and |union S_i| by brute force over S_n.

    S_i is the set of 0-queries for v that agree with c at position i.
    """
    _, masks = _s_masks(t, cutoff)
    single = {i: int(mask.sum()) for i, mask in masks.items()}
    pairwise = {(i, j): int((masks[i] & masks[j]).sum()) for i, j in combinations(t.I, 2)}
    union = np.zeros(math.factorial(t.n), dtype=bool)
    for mask in masks.values():
        union |= mask
    lower = sum(single.values()) - sum(pairwise.values())
    return SetSizeReport(t.n, len(t.I), single, pairwise, int(union.sum()), lower)


def check_claim_sizes_finite(t: TripleInstance, cutoff: int | None = None, pairwise: bool = True) -> bool:
    """The two double-counting inequalities, with explicit finite factors.

    (i)  n |S_i| >= A(n, m) - n (n-2)!  for every i in I
    (ii) (n-4)(n-5) |S_i & S_j| <= A(n, m), and S_i & S_j is empty when c(i) == c(j)

    Part (ii) needs n >= 6 so that (n-4)(n-5) is a positive factor.
    """
    n, m = t.n, len(t.I)
    if n < 2:
        raise OutOfRange(f"part (i) needs n >= 2, got {n}")
    if pairwise and n < 6:
        raise OutOfRange(f"part (ii) needs n >= 6, got {n}; pass pairwise=False")
    rep = enumerate_set_sizes(t, cutoff)
    a = count_zero_queries_formula(n, m)
    if any(n * s < a - n * math.factorial(n - 2) for s in rep.single.values()):
        return False
    if not pairwise:
        return True
    for (i, j), s in rep.pairwise.items():
        if t.c[i] == t.c[j]:
            if s != 0:
                return False
        elif (n - 4) * (n - 5) * s > a:
            return False
    return True


def discriminating_fraction(t: TripleInstance, cutoff: int | None = None) -> Fraction:
    """Probability that a uniform permutation discriminates v from c on I."""
    if not t.I:
        return Fraction(0)
    return Fraction(enumerate_set_sizes(t, cutoff).union, math.factorial(t.n))


def asymptotic_report(t: TripleInstance, cutoff: int | None = None) -> dict[str, Fraction]:
    """Ratios of enumerated sizes to their large-n approximations.  Informational only."""
    n, m = t.n, len(t.I)
    rep = enumerate_set_sizes(t, cutoff)
    a = count_zero_queries_formula(n, m)
    out: dict[str, Fraction] = {}
    if rep.single:
        out["min_S_i_over_A_div_n"] = Fraction(min(rep.single.values()) * n, a)
    if rep.pairwise and n > 1:
        out["max_SiSj_over_A_div_n(n-1)"] = Fraction(max(rep.pairwise.values()) * n * (n - 1), a)
    if m:
        frac = Fraction(rep.union, math.factorial(n))
        out["fraction"] = frac
        out["fraction_over_|I|/(7n)"] = frac / Fraction(m, 7 * n)
        out["union_over_|I|(n-1)!/6"] = Fraction(6 * rep.union, m * math.factorial(n - 1))
    return out


# --- query budget and union bound ------------------------------------------


@contextmanager
def _iv_prec(prec: int):
    saved = mpmath.iv.prec
    mpmath.iv.prec = prec
    try:
        yield
    finally:
        mpmath.iv.prec = saved


def _endpoint(x, side: int) -> Fraction:
    # raw endpoint tuple; going through mpf() would round it to the working precision
    sign, man, exp, _ = x._mpi_[side]
    if not man and exp:
        raise OutOfRange("interval endpoint is not finite")
    value = Fraction(man) * Fraction(2) ** exp
    return -value if sign else value


def _as_fraction(constant) -> Fraction:
    c = Fraction(constant)
    if c <= 0:
        raise OutOfRange(f"constant must be positive, got {constant}")
    return c


def required_query_count(n: int, constant=LEMMA_CONSTANT) -> int:
    """ceil(constant * n * ln n), exact.

    The product is irrational for n >= 2, so an outward-rounded interval whose
    endpoints share a floor pins the ceiling; precision doubles until they do.
    """
    if n < 2:
        raise OutOfRange(f"n must be >= 2 (ln 1 = 0 gives an empty set), got {n}")
    c = _as_fraction(constant)
    prec = 64
    while True:
        with _iv_prec(prec):
            x = mpmath.iv.mpf(c.numerator) / c.denominator * n * mpmath.iv.log(n)
            lo, hi = math.floor(_endpoint(x, 0)), math.floor(_endpoint(x, 1))
        if lo == hi:
            return lo + 1
        prec *= 2


def triple_count(n: int, k: int) -> int:
    """Exact number of (I, v, c) with |I| = k: C(n,k) * n!/(n-k)! * (n-1)^k."""
    if not 0 <= k <= n:
        raise OutOfRange(f"k={k} outside 0..{n}")
    return math.comb(n, k) * math.perm(n, k) * (n - 1) ** k


def failure_probability_bound(n: int) -> Fraction:
    """Union bound over |I| = k of n^(3k) triples each failing with probability n^(-4k)."""
    if n < 2:
        raise OutOfRange(f"n must be >= 2, got {n}")
    total = sum(Fraction(1, n**k) for k in range(1, n + 1))
    assert total < 1, f"union bound {total} not below 1 at n={n}"
    return total


@dataclass(frozen=True)
class TripleFailureBound:
    base: int
    exponent: int
    query_count: int
    verified: bool
    miss_upper: Fraction  # exact upper endpoint of the interval for (1 - k/(7n))^N

    @property
    def value(self) -> Fraction:
        return Fraction(1, self.base ** -self.exponent)


def per_triple_failure_bound(n: int, k: int, prec: int = 128) -> TripleFailureBound:
    """n^(-4k), plus an interval check that (1 - k/(7n))^N <= n^(-4k) for the lemma's budget N."""
    if n < 2:
        raise OutOfRange(f"n must be >= 2, got {n}")
    if not 1 <= k <= n:
        raise OutOfRange(f"k={k} outside 1..{n}")
    N = required_query_count(n)
    with _iv_prec(prec):
        miss = (1 - mpmath.iv.mpf(k) / (7 * n)) ** N
        upper = _endpoint(miss, 1)
    return TripleFailureBound(n, -4 * k, N, upper <= Fraction(1, n ** (4 * k)), upper)


# --- report -----------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator} (~{float(x):.6g})"
    return str(x)


def bounds_report(n: int, m: int | None = None, triples: Iterable[TripleInstance] = (),
                  cutoff: int | None = None) -> str:
    """Flat key=value report of every bound at size n."""
    if n < 1:
        raise OutOfRange(f"n must be >= 1, got {n}")
    ms = range(n + 1) if m is None else [m]
    lines = [f"n={n}"]
    for mm in ms:
        a = count_zero_queries_formula(n, mm)
        lines.append(f"A({n},{mm})={a} claim_a={'PASS' if check_claim_a(n, mm) else 'FAIL'}")
    if n >= 2:
        lines.append(f"required_query_count={required_query_count(n)}")
        lines.append(f"failure_probability_bound={_fmt(failure_probability_bound(n))}")
        ks = range(1, n + 1) if m is None else ([m] if m >= 1 else [])
        for k in ks:
            b = per_triple_failure_bound(n, k)
            lines.append(f"per_triple_bound(k={k})=n^{b.exponent} "
                         f"miss_upper={float(b.miss_upper):.6g} "
                         f"verified={'PASS' if b.verified else 'FAIL'}")
    triples = list(triples)
    if not triples and n >= 2:
        triples = [canonical_triple(n, mm) for mm in ms if mm >= 1]
    for idx, t in enumerate(triples):
        p = f"triple[{idx}]."
        lines.append(f"{p}instance={t}")
        rep = enumerate_set_sizes(t, cutoff)
        lines += rep.lines(p)
        lines.append(f"{p}bonferroni={'PASS' if rep.union >= rep.bonferroni_lower else 'FAIL'}")
        if t.n >= 2:
            ok = check_claim_sizes_finite(t, cutoff, pairwise=t.n >= 6)
            scope = "i+ii" if t.n >= 6 else "i"
            lines.append(f"{p}claim_sizes[{scope}]={'PASS' if ok else 'FAIL'}")
        for key, val in asymptotic_report(t, cutoff).items():
            lines.append(f"{p}report.{key}={_fmt(val)}")
    return "\n".join(lines) + "\n"
