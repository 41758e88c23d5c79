import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import feedback as oracle_feedback
from permmind.core import enumerate_permutations, make_permutation
from permmind.decoder import (
    FeedbackVector,
    answer_all,
    decode,
    predicted_work,
    read_feedback,
    round_trip_check,
    write_feedback,
)
from permmind.errors import InconsistentFeedback, MalformedFeedback, ParseError, SizeMismatch
from permmind.querygen import QuerySet, Rng, generate_query_set, random_permutation


def all_queries(n):
    return QuerySet(n, tuple(enumerate_permutations(n)))


CODEWORD = make_permutation(3, [2, 3, 1])


@st.composite
def query_case(draw, max_n=7, max_q=60):
    n = draw(st.integers(2, max_n))
    count = draw(st.integers(0, max_q))
    seed = draw(st.integers(0, 2**64 - 1))
    rng = Rng(seed)
    Q = QuerySet(n, tuple(random_permutation(n, rng) for _ in range(count)))
    return Q, random_permutation(n, rng)


# --- answering ---------------------------------------------------------------------


def test_answer_all_lexicographic_n3():
    Q = all_queries(3)
    fb = answer_all(Q, CODEWORD)
    assert list(fb.counts) == oracle_feedback([q.values for q in Q], CODEWORD.values) == [0, 1, 1, 3, 0, 1]


def test_answer_contains_codeword():
    Q = QuerySet(3, (make_permutation(3, [1, 2, 3]), CODEWORD))
    assert answer_all(Q, CODEWORD).counts[1] == 3


def test_answer_size_mismatch():
    with pytest.raises(SizeMismatch):
        answer_all(all_queries(3), make_permutation(2, [1, 2]))


@given(query_case())
def test_answers_match_oracle_and_skip_n_minus_1(case):
    Q, c = case
    fb = answer_all(Q, c)
    assert list(fb.counts) == oracle_feedback([q.values for q in Q], c.values)
    assert Q.n - 1 not in fb.counts


# --- decoding ----------------------------------------------------------------------


def test_decode_worked_example():
    Q = all_queries(3)
    tr = decode(Q, answer_all(Q, CODEWORD), record_sets=True)
    assert tr.success and tr.permutation == CODEWORD
    first = tr.steps[0]
    assert (first.position, first.colour, first.zero_queries) == (1, 2, 2)
    assert {Q.queries[t].values for t in tr.zero_query_sets[0]} == {(1, 2, 3), (3, 1, 2)}


def test_decode_n1_empty():
    tr = decode(QuerySet(1, ()), FeedbackVector(1, ()))
    assert tr.success and tr.permutation.values == (1,)


def test_decode_single_query_stuck():
    Q = QuerySet(3, (make_permutation(3, [1, 2, 3]),))
    tr = decode(Q, FeedbackVector(3, [0]))
    assert not tr.success and tr.remaining == (1, 2, 3) and tr.permutation is None
    assert "stuck" in tr.log()


@pytest.mark.parametrize("counts", [[4], [2], [-1]])
def test_malformed_feedback(counts):
    Q = QuerySet(3, (make_permutation(3, [1, 2, 3]),))
    with pytest.raises(MalformedFeedback):
        decode(Q, FeedbackVector(3, counts))


def test_feedback_length_mismatch():
    with pytest.raises(SizeMismatch):
        decode(all_queries(3), FeedbackVector(3, [0]))


def test_inconsistent_feedback_detected():
    # both queries use colours 2 and 3 at positions 2 and 3, so each of those positions lacks only colour 1
    Q = QuerySet(3, tuple(make_permutation(3, p) for p in [(1, 2, 3), (1, 3, 2)]))
    with pytest.raises(InconsistentFeedback):
        decode(Q, FeedbackVector(3, [0, 0]))
    with pytest.raises(InconsistentFeedback):
        decode(Q, FeedbackVector(3, [0, 0]), naive=True)


@pytest.mark.parametrize("n", range(1, 6))
def test_all_queries_recover_every_codeword(n):
    Q = all_queries(n)
    assert all(round_trip_check(Q, c) for c in enumerate_permutations(n))


def test_empty_set_fails():
    assert not round_trip_check(QuerySet(2, ()), make_permutation(2, [1, 2]))


@settings(max_examples=150, deadline=None)
@given(query_case())
def test_incremental_matches_naive(case):
    Q, c = case
    fb = answer_all(Q, c)
    fast = decode(Q, fb, record_sets=True)
    slow = decode(Q, fb, naive=True, record_sets=True)
    assert fast.steps == slow.steps
    assert fast.remaining == slow.remaining
    assert fast.zero_query_sets == slow.zero_query_sets


@settings(max_examples=150, deadline=None)
@given(query_case())
def test_transcript_invariants(case):
    Q, c = case
    fb = answer_all(Q, c)
    tr = decode(Q, fb, record_sets=True)
    positions = [s.position for s in tr.steps]
    colours = [s.colour for s in tr.steps]
    assert len(set(positions)) == len(positions) and len(set(colours)) == len(colours)
    sets = tr.zero_query_sets
    for earlier, later in zip(sets, sets[1:]):
        assert earlier <= later
    for step, zero in zip(tr.steps, sets):
        assert step.zero_queries == len(zero)
        assert step.colour == c(step.position)
        assert all(Q.queries[t](step.position) != step.colour for t in zero)
    if tr.success:
        assert answer_all(Q, tr.permutation) == fb


@settings(max_examples=100, deadline=None)
@given(query_case(max_n=5, max_q=20), st.data())
def test_arbitrary_feedback_is_sound(case, data):
    Q, _ = case
    n = Q.n
    allowed = [x for x in range(n + 1) if x != n - 1]
    counts = data.draw(st.lists(st.sampled_from(allowed), min_size=len(Q), max_size=len(Q)))
    fb = FeedbackVector(n, counts)
    try:
        tr = decode(Q, fb)
    except InconsistentFeedback:
        return
    if tr.success:
        assert answer_all(Q, tr.permutation) == fb


def test_deterministic_transcripts():
    Q = generate_query_set(10, 80, 4)
    c = random_permutation(10, Rng(1))
    a, b = decode(Q, answer_all(Q, c)), decode(Q, answer_all(Q, c))
    assert a.steps == b.steps and a.remaining == b.remaining and a.work == b.work


def test_work_within_budget_n64():
    Q = generate_query_set(64, "auto", 64)
    rng = Rng(640)
    for _ in range(5):
        c = random_permutation(64, rng)
        tr = decode(Q, answer_all(Q, c))
        assert tr.success and tr.permutation == c
        assert tr.work <= 10 * predicted_work(64, len(Q))


# --- feedback file -----------------------------------------------------------------


def test_feedback_file_round_trip():
    fb = FeedbackVector(4, [0, 2, 4, 1])
    buf = io.BytesIO()
    write_feedback(fb, buf)
    assert buf.getvalue() == b"PMMFB v1 n=4 count=4\n0 2 4 1\n"
    assert read_feedback(io.BytesIO(buf.getvalue())) == fb


def test_feedback_file_empty():
    buf = io.BytesIO()
    write_feedback(FeedbackVector(1, []), buf)
    assert read_feedback(io.BytesIO(buf.getvalue())) == FeedbackVector(1, [])


@pytest.mark.parametrize(
    "text, line",
    [(b"PMMFB v2 n=3 count=1\n0\n", 1), (b"PMMFB v1 n=3 count=2\n0\n", 2), (b"PMMFB v1 n=3 count=1\nx\n", 2)],
)
def test_feedback_parse_errors(text, line):
    with pytest.raises(ParseError) as exc:
        read_feedback(io.BytesIO(text))
    assert exc.value.line == line
