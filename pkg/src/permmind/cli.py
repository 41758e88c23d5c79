"""Command-line entry point.

Exit codes: 0 success/PASS, 1 usage or input error, 2 decoder stuck,
3 certificate FAIL, 4 exhaustive cutoff exceeded.  Every nonzero exit
writes one ``<tag>: <reason>`` line to stderr.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import bench as benchmod
from .bounds import bounds_report, parse_triple
from .certify import Level, certify, monte_carlo_certify
from .core import parse_permutation
from .decoder import answer_all, decode, read_feedback, write_feedback
from .errors import CutoffExceeded, PermMindError, SizeMismatch
from .querygen import AUTO, generate_query_set, read_query_set, write_query_set

EXIT_OK, EXIT_USAGE, EXIT_STUCK, EXIT_FAIL, EXIT_CUTOFF = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _count(text: str):
    return AUTO if text == AUTO else int(text)


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _frac_list(text: str) -> list[Fraction]:
    return [Fraction(x.strip()) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="permmind", description="Static permutation Mastermind toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a random static query set")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--count", type=_count, default=AUTO, help="number of queries or 'auto'")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("-o", "--output", required=True)

    a = sub.add_parser("answer", help="answer every query for a codeword")
    a.add_argument("--queries", required=True)
    a.add_argument("--codeword", required=True, help='e.g. "2 3 1"')
    a.add_argument("-o", "--output", required=True)

    d = sub.add_parser("decode", help="recover the codeword from feedback")
    d.add_argument("--queries", required=True)
    d.add_argument("--feedback", required=True)

    c = sub.add_parser("certify", help="certify a query set")
    c.add_argument("--queries", required=True)
    c.add_argument("--level", type=Level.parse, required=True)
    mode = c.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true")
    mode.add_argument("--mc", type=int, metavar="TRIALS")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--cutoff", type=int, default=None)

    b = sub.add_parser("bounds-report", help="print every counting bound at size n")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--m", type=int, default=None)
    b.add_argument("--triples", default=None, help="file of 'I | v | c' lines")

    s = sub.add_parser("bench", help="success rate sweep over n and the constant c")
    s.add_argument("--n-list", type=_int_list, required=True)
    s.add_argument("--c-list", type=_frac_list, required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--block", type=int, default=20, help="trials per freshly drawn query set")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("-o", "--output", required=True)
    return p


def _load_queries(path):
    with open(path, "rb") as fh:
        return read_query_set(fh)


def cmd_gen(args) -> int:
    Q = generate_query_set(args.n, args.count, args.seed)
    with open(args.output, "wb") as fh:
        write_query_set(Q, fh)
    print(f"wrote {len(Q)} queries (n={Q.n}, seed={Q.seed}) to {args.output}")
    return EXIT_OK


def cmd_answer(args) -> int:
    Q = _load_queries(args.queries)
    codeword = parse_permutation(args.codeword, Q.n)
    fb = answer_all(Q, codeword)
    with open(args.output, "wb") as fh:
        write_feedback(fb, fh)
    return EXIT_OK


def cmd_decode(args) -> int:
    Q = _load_queries(args.queries)
    with open(args.feedback, "rb") as fh:
        fb = read_feedback(fh)
    if fb.n != Q.n:
        raise SizeMismatch(f"queries have n={Q.n} but feedback has n={fb.n}")
    tr = decode(Q, fb)
    print(tr.log())
    if tr.success:
        print(tr.permutation)
        return EXIT_OK
    print(f"stuck: {len(tr.remaining)} positions unresolved", file=sys.stderr)
    return EXIT_STUCK


def cmd_certify(args) -> int:
    Q = _load_queries(args.queries)
    if args.mc is not None:
        cert = monte_carlo_certify(Q, args.level, args.mc, args.seed)
    else:
        cert = certify(Q, [args.level], args.cutoff)[0]
    sys.stdout.write(cert.report())
    if cert.passed:
        return EXIT_OK
    print(f"fail: level={cert.level.slug} mode={cert.mode}", file=sys.stderr)
    return EXIT_FAIL


def cmd_bounds_report(args) -> int:
    triples = []
    if args.triples:
        with open(args.triples) as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    triples.append(parse_triple(line, args.n))
    sys.stdout.write(bounds_report(args.n, args.m, triples))
    return EXIT_OK


def cmd_bench(args) -> int:
    rows = benchmod.run_bench(args.n_list, args.c_list, args.trials, args.seed,
                              args.block, args.workers)
    with open(args.output, "w", newline="") as fh:
        benchmod.write_csv(rows, fh)
    for row in rows:
        print(",".join(row.csv_fields()))
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "answer": cmd_answer,
    "decode": cmd_decode,
    "certify": cmd_certify,
    "bounds-report": cmd_bounds_report,
    "bench": cmd_bench,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CutoffExceeded as exc:
        print(f"error: CutoffExceeded: {exc}", file=sys.stderr)
        return EXIT_CUTOFF
    except PermMindError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())
