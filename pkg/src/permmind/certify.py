"""Certificates that a query set recovers every codeword, at three nested strengths.

UNIQUE_FEEDBACK  distinct codewords get distinct feedback vectors
DECODE_ALL       the one-colour-at-a-time decoder recovers every codeword
LEMMA_TRIPLES    every (I, v, c) with c != v pointwise is discriminated by some query

Exhaustive runs enumerate all instances; Monte Carlo runs sample them and a
PASS there only means no counterexample turned up.
"""

from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .bounds import TripleInstance
from .core import Permutation, discriminates, exhaustive_cutoff, permutation_array, triple_cutoff
from .decoder import DecodeTranscript, FeedbackVector, answer_all, decode
from .errors import CutoffExceeded, OutOfRange
from .querygen import QuerySet, Rng, random_permutation


class Level(enum.IntEnum):
    UNIQUE_FEEDBACK = 1
    DECODE_ALL = 2
    LEMMA_TRIPLES = 3

    @property
    def slug(self) -> str:
        return self.name.lower().replace("_", "-")

    @classmethod
    def parse(cls, text: str) -> Level:
        key = text.strip().upper().replace("-", "_")
        try:
            return cls[key]
        except KeyError:
            raise OutOfRange(f"unknown level {text!r}; use one of "
                             + ", ".join(lv.slug for lv in cls)) from None


@dataclass(frozen=True)
class CollisionWitness:
    first: Permutation
    second: Permutation
    feedback: tuple[int, ...]


@dataclass(frozen=True)
class DecodeWitness:
    codeword: Permutation
    transcript: DecodeTranscript = field(compare=False)
    triple: TripleInstance | None = None


@dataclass
class Certificate:
    level: Level
    mode: str  # "exhaustive" or "monte-carlo"
    passed: bool
    witness: Any = None
    instances: int = 0
    queries_scanned: int = 0
    trials: int | None = None
    seed: int | None = None

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def report(self) -> str:
        mode = self.mode if self.mode == "exhaustive" else f"{self.mode} trials={self.trials} seed={self.seed}"
        lines = [f"level={self.level.slug}", f"mode={mode}", f"verdict={self.verdict}"]
        if self.mode != "exhaustive" and self.passed:
            lines.append("semantics=no counterexample found in sampled instances")
        w = self.witness
        if isinstance(w, CollisionWitness):
            lines += [f"witness.codeword_a={w.first}", f"witness.codeword_b={w.second}",
                      f"witness.feedback={' '.join(map(str, w.feedback))}"]
        elif isinstance(w, DecodeWitness):
            lines.append(f"witness.codeword={w.codeword}")
            known = w.transcript.assignment
            lines.append("witness.known=" + " ".join(f"{i}:{c}" for i, c in sorted(known.items())))
            lines.append(f"witness.remaining={' '.join(map(str, w.transcript.remaining))}")
            if w.triple is not None:
                lines += _triple_lines(w.triple)
        elif isinstance(w, TripleInstance):
            lines += _triple_lines(w)
        lines += [f"work.instances={self.instances}", f"work.queries_scanned={self.queries_scanned}"]
        return "\n".join(lines) + "\n"


def _triple_lines(t: TripleInstance) -> list[str]:
    return [f"witness.I={' '.join(map(str, t.I))}",
            f"witness.v={' '.join(map(str, t.v.colours))}",
            f"witness.c={' '.join(map(str, t.c.colours))}"]


def _require(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise CutoffExceeded(n, limit, what)


def _feedback_matrix(Q: QuerySet, perms: np.ndarray) -> np.ndarray:
    """(len(perms), |Q|) black-peg counts, computed position by position."""
    out = np.zeros((len(perms), len(Q)), dtype=np.int16)
    qa = Q.array
    for i in range(Q.n):
        out += perms[:, i, None] == qa[None, :, i]
    return out


# --- exhaustive ---------------------------------------------------------------


def certify_unique_feedback(Q: QuerySet, cutoff: int | None = None) -> Certificate:
    n = Q.n
    _require(n, exhaustive_cutoff(cutoff), "unique-feedback certification")
    perms = permutation_array(n, cutoff)
    F = _feedback_matrix(Q, perms)
    cert = Certificate(Level.UNIQUE_FEEDBACK, "exhaustive", True,
                       instances=len(perms), queries_scanned=len(perms) * len(Q))
    # first occurrence of each distinct row; the earliest repeat gives the canonical pair
    _, first, inverse = np.unique(F, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    repeats = np.flatnonzero(first[inverse] != np.arange(len(perms)))
    if len(repeats):
        b = int(repeats[0])
        a = int(first[inverse[b]])
        cert.passed = False
        cert.witness = CollisionWitness(Permutation._trusted(tuple(perms[a].tolist())),
                                        Permutation._trusted(tuple(perms[b].tolist())),
                                        tuple(F[b].tolist()))
    return cert


def _decode_range(Q: QuerySet, start: int, stop: int) -> tuple[int | None, int]:
    """Index of the first codeword in [start, stop) that fails to round-trip, and work done."""
    perms = permutation_array(Q.n, Q.n)[start:stop]
    F = _feedback_matrix(Q, perms)
    work = 0
    for k, row in enumerate(F):
        tr = decode(Q, FeedbackVector(Q.n, row.tolist()))
        work += tr.work
        if not tr.success or tr.permutation.values != tuple(perms[k].tolist()):
            return start + k, work
    return None, work


def certify_decode_all(Q: QuerySet, cutoff: int | None = None, workers: int = 1) -> Certificate:
    """Round-trip every codeword; FAIL names the lexicographically first failure."""
    n = Q.n
    _require(n, exhaustive_cutoff(cutoff), "decode-all certification")
    total = math.factorial(n)
    if workers > 1 and total > 1:
        bounds = np.linspace(0, total, workers + 1).astype(int)
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_decode_range, [Q] * workers, bounds[:-1], bounds[1:]))
        fails = [f for f, _ in parts if f is not None]
        failing = min(fails) if fails else None
        work = sum(w for _, w in parts)
    else:
        failing, work = _decode_range(Q, 0, total)
    checked = total if failing is None else failing + 1
    cert = Certificate(Level.DECODE_ALL, "exhaustive", failing is None,
                       instances=checked, queries_scanned=work)
    if failing is not None:
        codeword = Permutation._trusted(tuple(permutation_array(n, n)[failing].tolist()))
        cert.witness = _decode_witness(Q, codeword, decode(Q, answer_all(Q, codeword)))
    return cert


def witness_triple(Q: QuerySet, codeword: Permutation, tr: DecodeTranscript) -> TripleInstance | None:
    """The undiscriminated (I, v, c) behind a stuck decode.

    I is the unresolved set, v the codeword on I, and c(i) the smallest colour
    other than v(i) that no 0-query for v shows at position i.
    """
    if tr.success:
        return None
    I = list(tr.remaining)
    v = [codeword(i) for i in I]
    zero = _zero_mask(Q.array, I, v)
    c = []
    for i, vi in zip(I, v):
        seen = set(Q.array[zero, i - 1].tolist()) | {vi}
        c.append(min(set(range(1, Q.n + 1)) - seen))
    return TripleInstance.from_lists(Q.n, I, v, c)


def _decode_witness(Q: QuerySet, codeword: Permutation, tr: DecodeTranscript) -> DecodeWitness:
    return DecodeWitness(codeword, tr, witness_triple(Q, codeword, tr))


def _zero_mask(qa: np.ndarray, I: Sequence[int], v: Sequence[int]) -> np.ndarray:
    mask = np.ones(len(qa), dtype=bool)
    for i, col in zip(I, v):
        mask &= qa[:, i - 1] != col
    return mask


def certify_lemma_triples(Q: QuerySet, cutoff: int | None = None) -> Certificate:
    """Every triple (I, v, c) is discriminated by some query.

    For fixed (I, v) with 0-queries Z, a colouring c escapes every query iff
    each c(i) avoids v(i) and all colours Z shows at position i.  So each
    (I, v) is settled by one pass over Z, and the first escaping c in
    lexicographic order takes the smallest such colour at every position.
    Instances are visited by |I|, then I, v, c lexicographically.
    """
    n = Q.n
    _require(n, triple_cutoff(cutoff), "lemma-triples certification")
    qa = Q.array
    full = set(range(1, n + 1))
    instances = 0
    scanned = 0
    for k in range(1, n + 1):
        per_v = (n - 1) ** k
        for I in itertools.combinations(range(1, n + 1), k):
            cols = [qa[:, i - 1] for i in I]
            for v in itertools.permutations(range(1, n + 1), k):
                zero = np.ones(len(qa), dtype=bool)
                for col, vi in zip(cols, v):
                    zero &= col != vi
                scanned += len(qa)
                escape = []
                for col, vi in zip(cols, v):
                    free = full - set(np.unique(col[zero]).tolist()) - {vi}
                    if not free:
                        break
                    escape.append(min(free))
                else:
                    witness = TripleInstance.from_lists(n, I, v, escape)
                    instances += _rank_colouring(n, v, escape) + 1
                    return Certificate(Level.LEMMA_TRIPLES, "exhaustive", False, witness,
                                       instances, scanned)
                instances += per_v
    return Certificate(Level.LEMMA_TRIPLES, "exhaustive", True, None, instances, scanned)


def _rank_colouring(n: int, v: Sequence[int], c: Sequence[int]) -> int:
    """Position of c among the pointwise-different colourings of v, in lexicographic order."""
    rank = 0
    for vi, ci in zip(v, c):
        digit = ci - 1 - (ci > vi)
        rank = rank * (n - 1) + digit
    return rank


# --- brute force reference ------------------------------------------------------


def iter_triples(n: int) -> Iterable[TripleInstance]:
    """All (I, v, c) in certification order: |I|, then I, v, c lexicographically."""
    colours = range(1, n + 1)
    for k in range(1, n + 1):
        for I in itertools.combinations(colours, k):
            for v in itertools.permutations(colours, k):
                choices = [[x for x in colours if x != vi] for vi in v]
                for c in itertools.product(*choices):
                    yield TripleInstance.from_lists(n, I, v, c)


def triple_discriminated(Q: QuerySet, t: TripleInstance) -> bool:
    """Scan Q for a discriminating query, stopping at the first."""
    return any(discriminates(q, t.v, t.c) for q in Q.queries)


# --- Monte Carlo ---------------------------------------------------------------


def _random_triple(n: int, rng: Rng) -> TripleInstance:
    k = rng.bounded(n) + 1
    I = sorted(rng.shuffle(list(range(1, n + 1)))[:k])
    v = rng.shuffle(list(range(1, n + 1)))[:k]
    c = []
    for vi in v:
        x = rng.bounded(n - 1) + 1
        c.append(x + (x >= vi))
    return TripleInstance.from_lists(n, I, v, c)


def monte_carlo_certify(Q: QuerySet, level: Level, trials: int, seed: int) -> Certificate:
    if trials < 1:
        raise OutOfRange(f"trials must be >= 1, got {trials}")
    level = Level(level)
    n = Q.n
    rng = Rng(seed)
    cert = Certificate(level, "monte-carlo", True, trials=trials, seed=rng.seed)
    qa = Q.array
    for _ in range(trials):
        cert.instances += 1
        cert.queries_scanned += len(Q)
        if level is Level.UNIQUE_FEEDBACK:
            if n == 1:
                continue
            a = random_permutation(n, rng)
            b = random_permutation(n, rng)
            while b == a:
                b = random_permutation(n, rng)
            fa, fb = answer_all(Q, a), answer_all(Q, b)
            if fa.counts == fb.counts:
                first, second = sorted((a, b), key=lambda p: p.values)
                cert.passed = False
                cert.witness = CollisionWitness(first, second, fa.counts)
                break
        elif level is Level.DECODE_ALL:
            codeword = random_permutation(n, rng)
            tr = decode(Q, answer_all(Q, codeword))
            if not tr.success or tr.permutation != codeword:
                cert.passed = False
                cert.witness = _decode_witness(Q, codeword, tr)
                break
        else:
            if n == 1:
                continue  # no colouring differs from v pointwise
            t = _random_triple(n, rng)
            zero = _zero_mask(qa, t.I, t.v.colours)
            hit = np.zeros(len(qa), dtype=bool)
            for i, ci in t.c.assignments:
                hit |= qa[:, i - 1] == ci
            if not (zero & hit).any():
                cert.passed = False
                cert.witness = t
                break
    return cert


# --- hierarchy ------------------------------------------------------------------


def check_hierarchy(certs: Iterable[Certificate]) -> None:
    """Exhaustive PASS at a level must come with PASS at every weaker level run."""
    exhaustive = {c.level: c.passed for c in certs if c.mode == "exhaustive"}
    for strong, ok in exhaustive.items():
        if not ok:
            continue
        for weak, weak_ok in exhaustive.items():
            if weak < strong and not weak_ok:
                raise AssertionError(f"{strong.slug} passed but {weak.slug} failed")


def certify(Q: QuerySet, levels: Sequence[Level], cutoff: int | None = None) -> list[Certificate]:
    runners = {
        Level.UNIQUE_FEEDBACK: certify_unique_feedback,
        Level.DECODE_ALL: certify_decode_all,
        Level.LEMMA_TRIPLES: certify_lemma_triples,
    }
    certs = [runners[Level(lv)](Q, cutoff) for lv in levels]
    check_hierarchy(certs)
    return certs
