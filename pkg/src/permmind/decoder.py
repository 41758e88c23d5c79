"""Black-peg answering and one-colour-at-a-time codeword recovery for a static query set."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .core import Permutation
from .errors import InconsistentFeedback, MalformedFeedback, ParseError, SizeMismatch
from .querygen import QuerySet


@dataclass(frozen=True)
class FeedbackVector:
    n: int
    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(x) for x in self.counts))

    def __len__(self):
        return len(self.counts)

    def validate(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        bad = np.flatnonzero((counts < 0) | (counts > self.n) | (counts == self.n - 1))
        if len(bad):
            t = int(bad[0])
            x = self.counts[t]
            if x == self.n - 1:
                raise MalformedFeedback(f"entry {t} = n-1 = {x} is impossible for two permutations")
            raise MalformedFeedback(f"entry {t} = {x} outside 0..{self.n}")


@dataclass(frozen=True)
class Step:
    position: int
    colour: int
    zero_queries: int  # |Q_I| when the position was resolved


@dataclass
class DecodeTranscript:
    n: int
    steps: list[Step]
    assignment: dict[int, int]
    remaining: tuple[int, ...]
    work: int = 0
    zero_query_sets: list[frozenset[int]] | None = field(default=None, repr=False)

    @property
    def success(self) -> bool:
        return not self.remaining

    @property
    def permutation(self) -> Permutation | None:
        if not self.success:
            return None
        return Permutation(self.n, tuple(self.assignment[i] for i in range(1, self.n + 1)))

    def log(self) -> str:
        out = []
        for k, s in enumerate(self.steps, 1):
            out.append(f"step {k}: position {s.position} <- colour {s.colour} (|Q_I|={s.zero_queries})")
        if self.success:
            out.append(f"success: {self.permutation}")
        else:
            known = " ".join(f"{i}:{c}" for i, c in sorted(self.assignment.items()))
            out.append(f"stuck: known {{{known}}} remaining {' '.join(map(str, self.remaining))}")
        return "\n".join(out)


def answer_all(Q: QuerySet, codeword: Permutation) -> FeedbackVector:
    if Q.n != codeword.n:
        raise SizeMismatch(f"query set n={Q.n} but codeword n={codeword.n}")
    if not len(Q):
        return FeedbackVector(Q.n, ())
    counts = (Q.array == np.asarray(codeword.values)).sum(axis=1)
    return FeedbackVector(Q.n, counts.tolist())


def _prepare(Q: QuerySet, feedback: FeedbackVector) -> np.ndarray:
    if feedback.n != Q.n:
        raise SizeMismatch(f"query set n={Q.n} but feedback n={feedback.n}")
    if len(feedback) != len(Q):
        raise SizeMismatch(f"{len(Q)} queries but {len(feedback)} feedback entries")
    feedback.validate()
    return np.asarray(feedback.counts, dtype=np.int64)


def decode(Q: QuerySet, feedback: FeedbackVector, naive: bool = False,
           record_sets: bool = False) -> DecodeTranscript:
    """Recover the codeword behind ``feedback``.

    While positions I remain unknown, Q_I holds the queries whose black pegs
    are fully explained by the recovered positions.  The smallest i in I at
    which Q_I shows n-1 distinct colours gets the one colour it lacks.  A
    transcript with ``remaining`` non-empty means no position was resolvable.

    ``naive=True`` recomputes everything from scratch each step (slow
    reference path); ``record_sets`` stores Q_I before every step.
    """
    counts = _prepare(Q, feedback)
    if naive:
        return _decode_naive(Q, counts, record_sets)
    n = Q.n
    A = Q.zero_based
    order, starts = Q.position_index
    residual = counts.copy()
    unknown = np.ones(n, dtype=bool)
    entered = np.flatnonzero(residual == 0)
    in_set = residual == 0
    flat_base = np.arange(n) * n
    tally = np.bincount((flat_base + A[entered]).ravel(), minlength=n * n)
    distinct = (tally.reshape(n, n) > 0).sum(axis=1)
    size = len(entered)
    work = len(entered) * n
    steps: list[Step] = []
    assignment: dict[int, int] = {}
    sets = [] if record_sets else None

    while unknown.any():
        if sets is not None:
            sets.append(frozenset(np.flatnonzero(in_set).tolist()))
        ready = np.flatnonzero(unknown & (distinct == n - 1))
        work += n
        if not len(ready):
            break
        i = int(ready[0])
        row = tally[i * n:(i + 1) * n]
        colour = int(np.flatnonzero(row == 0)[0])
        if colour + 1 in assignment.values():
            raise InconsistentFeedback(f"colour {colour + 1} forced at two positions")
        steps.append(Step(i + 1, colour + 1, size))
        assignment[i + 1] = colour + 1
        unknown[i] = False
        hits = order[i, starts[i, colour]:starts[i, colour + 1]]
        work += len(hits)
        residual[hits] -= 1
        if len(hits) and residual[hits].min() < 0:
            raise InconsistentFeedback("a query would need negative black pegs")
        new = hits[residual[hits] == 0]
        if len(new):
            in_set[new] = True
            size += len(new)
            cells = (flat_base + A[new]).ravel()
            fresh = np.unique(cells[tally[cells] == 0])
            np.add.at(tally, cells, 1)
            distinct += np.bincount(fresh // n, minlength=n)
            work += len(new) * n

    remaining = tuple((np.flatnonzero(unknown) + 1).tolist())
    if not remaining and residual.any():
        raise InconsistentFeedback("recovered permutation does not reproduce the feedback")
    return DecodeTranscript(n, steps, assignment, remaining, work, sets)


def _decode_naive(Q: QuerySet, counts: np.ndarray, record_sets: bool) -> DecodeTranscript:
    n = Q.n
    rows = [q.values for q in Q.queries]
    counts = counts.tolist()
    assignment: dict[int, int] = {}
    unknown = list(range(1, n + 1))
    steps: list[Step] = []
    sets = [] if record_sets else None
    work = 0
    while unknown:
        zero = []
        for t, row in enumerate(rows):
            explained = sum(row[i - 1] == c for i, c in assignment.items())
            work += n
            if counts[t] - explained == 0:
                zero.append(t)
        if sets is not None:
            sets.append(frozenset(zero))
        found = None
        for i in unknown:
            seen = {rows[t][i - 1] for t in zero}
            if len(seen) == n - 1:
                found = i, (set(range(1, n + 1)) - seen).pop()
                break
        if found is None:
            break
        i, colour = found
        if colour in assignment.values():
            raise InconsistentFeedback(f"colour {colour} forced at two positions")
        steps.append(Step(i, colour, len(zero)))
        assignment[i] = colour
        unknown.remove(i)
    if not unknown:
        for t, row in enumerate(rows):
            if sum(row[i - 1] == c for i, c in assignment.items()) != counts[t]:
                raise InconsistentFeedback("recovered permutation does not reproduce the feedback")
    return DecodeTranscript(n, steps, assignment, tuple(unknown), work, sets)


def round_trip_check(Q: QuerySet, codeword: Permutation) -> bool:
    transcript = decode(Q, answer_all(Q, codeword))
    return transcript.success and transcript.permutation == codeword


def predicted_work(n: int, count: int) -> int:
    """Operation budget the incremental decoder is designed to stay within: |Q| n + n^2."""
    return count * n + n * n


# --- feedback file format --------------------------------------------------


def write_feedback(fb: FeedbackVector, sink: IO[bytes]) -> None:
    text = f"PMMFB v1 n={fb.n} count={len(fb)}\n" + " ".join(map(str, fb.counts)) + "\n"
    sink.write(text.encode("ascii"))


def read_feedback(source: IO[bytes]) -> FeedbackVector:
    import re

    try:
        lines = source.read().decode("ascii").split("\n")
    except UnicodeDecodeError:
        raise ParseError(1, "non-ASCII content") from None
    m = re.match(r"^PMMFB v1 n=(\d+) count=(\d+)$", lines[0])
    if not m:
        raise ParseError(1, f"bad header {lines[0]!r}")
    n, count = int(m.group(1)), int(m.group(2))
    if len(lines) < 2:
        raise ParseError(2, "missing counts line")
    body = lines[1].strip()
    if any(line.strip() for line in lines[2:]):
        raise ParseError(3, "unexpected content after counts line")
    try:
        counts = [int(x) for x in body.split()] if body else []
    except ValueError:
        raise ParseError(2, f"non-integer count in {body!r}") from None
    if len(counts) != count:
        raise ParseError(2, f"header declares count={count} but line has {len(counts)} entries")
    return FeedbackVector(n, counts)
