"""Static permutation Mastermind: random query sets, codeword recovery, certification."""

from .bounds import (
    SetSizeReport,
    TripleInstance,
    check_claim_a,
    check_claim_sizes_finite,
    discriminating_fraction,
    enumerate_set_sizes,
    failure_probability_bound,
    per_triple_failure_bound,
    required_query_count,
)
from .certify import (
    Certificate,
    Level,
    certify_decode_all,
    certify_lemma_triples,
    certify_unique_feedback,
    monte_carlo_certify,
)
from .core import (
    PartialColouring,
    Permutation,
    black_pegs,
    count_zero_queries_formula,
    discriminates,
    enumerate_permutations,
    is_zero_query,
    make_permutation,
)
from .decoder import DecodeTranscript, FeedbackVector, answer_all, decode, round_trip_check
from .errors import *  # noqa: F401,F403
from .querygen import AUTO, QuerySet, Rng, generate_query_set, random_permutation, read_query_set, write_query_set

__version__ = "0.1.0"
