import io
import math
from collections import Counter

import numpy as np
import pytest
from scipy import stats

from permmind.core import make_permutation
from permmind.errors import OutOfRange, ParseError, SizeMismatch
from permmind.querygen import (
    GENERATOR_ID,
    QuerySet,
    Rng,
    derive_seed,
    generate_query_set,
    random_permutation,
    read_query_set,
    write_query_set,
)


def test_n1_is_always_identity():
    rng = Rng(99)
    assert all(random_permutation(1, rng).values == (1,) for _ in range(10))


def test_golden_permutations():
    rng = Rng(12345)
    assert random_permutation(5, rng).values == (2, 4, 1, 3, 5)
    assert random_permutation(5, rng).values == (3, 2, 1, 5, 4)


def test_golden_raw_stream():
    rng = Rng(0)
    assert [rng.next_u64() for _ in range(3)] == [
        11749869230777074271,
        4976686463289251617,
        755828109848996024,
    ]


def test_golden_query_set():
    Q = generate_query_set(4, 5, 7)
    assert [q.values for q in Q] == [(2, 1, 3, 4), (4, 1, 2, 3), (3, 4, 2, 1), (1, 4, 3, 2), (2, 3, 4, 1)]
    assert Q.seed == 7 and Q.generator_id == GENERATOR_ID


def test_golden_derived_seed():
    assert derive_seed(2026, 8, 28, 1, 0) == 11915879634450049284


class _Scripted(Rng):
    def __init__(self, words):
        super().__init__(0)
        self._words = list(words)

    def next_u64(self):
        return self._words.pop(0)


def test_bounded_rejects_biased_tail():
    b = (1 << 63) + 1
    limit = (1 << 64) - (1 << 64) % b
    rng = _Scripted([limit, (1 << 64) - 1, 3])
    assert rng.bounded(b) == 3
    assert rng._words == []


def test_bounded_one_consumes_nothing():
    rng = _Scripted([])
    assert rng.bounded(1) == 0


def test_seed_must_be_64_bit():
    with pytest.raises(OutOfRange):
        Rng(-1)
    with pytest.raises(OutOfRange):
        Rng(1 << 64)


def test_substreams_differ():
    a = [Rng(5, 0).next_u64() for _ in range(1)]
    b = [Rng(5, 1).next_u64() for _ in range(1)]
    assert a != b
    assert Rng(5, 1).next_u64() == Rng(5, 1).next_u64()


def test_auto_size():
    assert len(generate_query_set(4, "auto", 123)) == 156


def test_single_query_n2():
    Q = generate_query_set(2, 1, 42)
    assert len(Q) == 1 and Q.queries[0].values in {(1, 2), (2, 1)}


def test_duplicates_are_kept():
    Q = generate_query_set(3, 100, 1)
    assert len(Q) == 100
    assert max(Counter(Q.queries).values()) >= 2
    assert len(Q.deduplicated()) <= 6


def test_generation_is_deterministic():
    assert generate_query_set(6, 50, 9) == generate_query_set(6, 50, 9)
    assert generate_query_set(6, 50, 9) != generate_query_set(6, 50, 10)


@pytest.mark.parametrize("n, count", [(1, 5), (3, 0)])
def test_generate_rejects(n, count):
    with pytest.raises(OutOfRange):
        generate_query_set(n, count, 0)


def test_per_position_frequencies_uniform():
    n, samples = 8, 100_000
    rng = Rng(2024)
    arr = np.array([random_permutation(n, rng).values for _ in range(samples)])
    p = 1 / n
    se = math.sqrt(samples * p * (1 - p))
    for i in range(n):
        counts = np.bincount(arr[:, i], minlength=n + 1)[1:]
        assert np.all(np.abs(counts - samples * p) < 5 * se)


def _lehmer_rank(values):
    rank = 0
    items = sorted(values)
    for x in values:
        k = items.index(x)
        rank = rank * len(items) + k
        items.pop(k)
    return rank


@pytest.mark.slow
def test_chi_squared_over_all_permutations_of_6():
    n, samples = 6, 1_000_000
    rng = Rng(77)
    cells = Counter(_lehmer_rank(random_permutation(n, rng).values) for _ in range(samples))
    assert len(cells) == 720
    expected = samples / 720
    statistic = sum((c - expected) ** 2 / expected for c in cells.values())
    assert statistic < stats.chi2.ppf(0.999, 719)


def test_lehmer_rank_is_a_bijection():
    import itertools

    ranks = [_lehmer_rank(p) for p in itertools.permutations(range(1, 5))]
    assert ranks == list(range(24))


# --- file format ------------------------------------------------------------


def _dump(Q):
    buf = io.BytesIO()
    write_query_set(Q, buf)
    return buf.getvalue()


def test_round_trip():
    Q = generate_query_set(5, 40, 3)
    assert read_query_set(io.BytesIO(_dump(Q))) == Q


def test_round_trip_keeps_duplicates_and_no_seed():
    p = make_permutation(3, [3, 1, 2])
    Q = QuerySet(3, (p, p), None, "hand")
    assert read_query_set(io.BytesIO(_dump(Q))) == Q


def test_bit_exact_layout():
    Q = generate_query_set(3, 2, 5)
    lines = _dump(Q).decode("ascii").split("\n")
    assert lines[0] == f"PMM v1 n=3 count=2 seed=5 gen={GENERATOR_ID}"
    assert lines[-1] == "" and len(lines) == 4
    assert all(len(line.split(" ")) == 3 for line in lines[1:3])


def test_hand_written_file():
    text = b"PMM v1 n=3 count=2 seed=0 gen=hand\n1 2 3\n3 1 2\n"
    Q = read_query_set(io.BytesIO(text))
    assert [q.values for q in Q] == [(1, 2, 3), (3, 1, 2)]


@pytest.mark.parametrize(
    "text, line",
    [
        (b"PMM v1 n=3 count=2 seed=0 gen=x\n1 2 3\n3 3 2\n", 3),
        (b"PMM v2 n=3 count=1 seed=0 gen=x\n1 2 3\n", 1),
        (b"PMM v1 n=3 count=1 seed=0 gen=x\n1 2\n", 2),
        (b"PMM v1 n=3 count=1 seed=0 gen=x\n1 2 x\n", 2),
        (b"PMM v1 n=3 count=2 seed=0 gen=x\n1 2 3\n", 3),
    ],
)
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(ParseError) as exc:
        read_query_set(io.BytesIO(text))
    assert exc.value.line == line


def test_queryset_rejects_mixed_sizes():
    with pytest.raises(SizeMismatch):
        QuerySet(3, (make_permutation(2, [1, 2]),))
