"""DIMACS and incremental CNF input, result lines and the stats CSV."""
import io
import random

import pytest

from bisat.formats import (STATS_COLUMNS, AddClause, IncrementalProblem, ParseError, Query,
                           parse_any, parse_dimacs, parse_icnf, read_stats_csv, result_lines,
                           to_dimacs, to_icnf, write_stats_csv)
from bisat.generators import counter_bmc, pigeonhole_incremental, random_incremental
from bisat.solver import QueryStats, Verdict


def test_plain_dimacs():
    p = parse_dimacs("p cnf 2 2\n1 2 0\n-1 0\n")
    assert p.clauses == [(1, 2), (-1,)]
    assert p.queries == [()]
    assert p.max_var == 2


def test_tautology_is_dropped_at_load():
    p = parse_dimacs("p cnf 1 1\n1 -1 0\n")
    assert p.clauses == [] and p.queries == [()]


def test_clause_may_span_lines_and_share_lines():
    p = parse_dimacs("c hi\np cnf 3 3\n1 2\n 3 0 -1 0\n-2 0\n")
    assert p.clauses == [(1, 2, 3), (-1,), (-2,)]


def test_incremental_grammar():
    p = parse_icnf("p inccnf\n1 2 0\na -1 0\na 1 0\n")
    assert p.events == [AddClause((1, 2)), Query((-1,)), Query((1,))]


def test_incremental_without_queries_acts_like_dimacs():
    p = parse_icnf("p inccnf\n1 2 0\n-1 0\n")
    assert p.clauses == [(1, 2), (-1,)] and p.queries == [()]


def test_parse_any_dispatches_on_header():
    assert parse_any("p inccnf\n1 0\na 0\n").queries == [()]
    assert parse_any("c x\np cnf 1 1\n1 0\n").clauses == [(1,)]


@pytest.mark.parametrize("text", [
    "1 2 0\n",                          # no header
    "p cnf 2 1\n1 3 0\n",               # literal out of range
    "p cnf 2 1\n1 2\n",                 # missing terminator
    "p cnf 2 2\n1 2 0\n",               # clause count mismatch
    "p cnf 2 1\n1 x 0\n",               # junk token
    "p cnf 2\n1 0\n",                   # malformed header
    "p cnf 2 1\np cnf 2 1\n1 0\n",      # duplicate header
    "p cnf 2 1\na 1 0\n1 0\n",          # query in plain DIMACS
])
def test_malformed_dimacs(text):
    with pytest.raises(ParseError):
        parse_dimacs(text)


@pytest.mark.parametrize("text", [
    "p inccnf\n1 2\na 1 0\n0\n",        # query inside a clause
    "p inccnf\na 1\n",                  # unterminated query
    "p inccnf\na 1 0 2 0\n",            # zero inside a query
])
def test_malformed_icnf(text):
    with pytest.raises(ParseError):
        parse_icnf(text)


def test_parse_error_carries_line_number():
    with pytest.raises(ParseError) as info:
        parse_dimacs("p cnf 2 1\nc ok\n1 5 0\n")
    assert info.value.line == 3


def _dimacs_view(p: IncrementalProblem):
    return p.max_var, p.clauses


@pytest.mark.parametrize("seed", range(100))
def test_dimacs_round_trip(seed):
    p = random_incremental(random.Random(seed))
    once = parse_dimacs(to_dimacs(p))
    assert once.clauses == p.clauses
    twice = parse_dimacs(to_dimacs(once))
    assert _dimacs_view(twice) == _dimacs_view(once)


@pytest.mark.parametrize("seed", range(100))
def test_icnf_round_trip(seed):
    p = random_incremental(random.Random(seed))
    back = parse_icnf(to_icnf(p))
    assert back.events == p.events


@pytest.mark.parametrize("problem", [counter_bmc(4, 5, seed=3), pigeonhole_incremental(4)])
def test_generated_incremental_round_trip(problem):
    assert parse_icnf(to_icnf(problem)).events == problem.events


def test_result_lines():
    assert result_lines(Verdict("UNSAT")) == ["s UNSATISFIABLE"]
    assert result_lines(Verdict("UNKNOWN")) == ["s UNKNOWN"]
    sat = Verdict("SAT", model=[False, True, False])
    assert result_lines(sat) == ["s SATISFIABLE"]
    assert result_lines(sat, with_model=True) == ["s SATISFIABLE", "v 1 -2 0"]


def test_empty_stats_give_header_only():
    buf = io.StringIO()
    write_stats_csv([], buf)
    assert buf.getvalue().splitlines() == [",".join(STATS_COLUMNS)]


def test_stats_round_trip():
    rows = [QueryStats(query_index=i, verdict=v, conflicts=10 * i, propagations=7 + i,
                       inprocess_invocations=i, conditional_selfsumptions=2 * i,
                       stashed_restorations=3, eliminations=i % 2, sumptions=5,
                       chosen_strategy="DYN→AL", wall_time=0.125 * i)
            for i, v in enumerate(["SAT", "UNSAT", "UNKNOWN"], start=1)]
    buf = io.StringIO()
    write_stats_csv(rows, buf)
    assert len(buf.getvalue().splitlines()) == 4
    buf.seek(0)
    assert read_stats_csv(buf) == rows


def test_stats_extra_columns():
    row = QueryStats(query_index=1)
    row.bounds_solved = 7
    buf = io.StringIO()
    write_stats_csv([row], buf, extra=("bounds_solved",))
    header, line = buf.getvalue().splitlines()
    assert header.endswith(",bounds_solved") and line.endswith(",7")
