"""DIMACS / incremental CNF readers and writers, result lines and stats CSV.

The incremental grammar is DIMACS with a ``p inccnf`` header (no counts) and
query lines ``a l1 ... lk 0`` that may be interleaved with clause lines.
"""
from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass, field
from typing import IO, Iterable, List, Sequence, Tuple, Union

from .core import make_clause, var_of
from .solver import QueryStats


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


@dataclass(frozen=True)
class AddClause:
    clause: Tuple[int, ...]


@dataclass(frozen=True)
class Query:
    assumptions: Tuple[int, ...]


Event = Union[AddClause, Query]


@dataclass
class IncrementalProblem:
    max_var: int = 0
    events: List[Event] = field(default_factory=list)

    @property
    def clauses(self) -> List[Tuple[int, ...]]:
        return [e.clause for e in self.events if isinstance(e, AddClause)]

    @property
    def queries(self) -> List[Tuple[int, ...]]:
        return [e.assumptions for e in self.events if isinstance(e, Query)]


def _ints(tokens, lineno, max_var):
    out = []
    for tok in tokens:
        try:
            x = int(tok)
        except ValueError:
            raise ParseError(lineno, f"not an integer: {tok!r}") from None
        if max_var is not None and abs(x) > max_var:
            raise ParseError(lineno, f"literal {x} exceeds declared variable count {max_var}")
        out.append(x)
    return out


def _parse(text: str, incremental: bool) -> IncrementalProblem:
    problem = IncrementalProblem()
    header_seen = False
    max_var = None
    declared_clauses = None
    pending: List[int] = []
    pending_line = 0
    n_clauses = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            if header_seen:
                raise ParseError(lineno, "duplicate header")
            parts = line.split()
            if incremental and parts[1:2] == ["inccnf"] and len(parts) == 2:
                header_seen = True
                continue
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(lineno, f"malformed header {line!r}")
            try:
                max_var, declared_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(lineno, f"malformed header {line!r}") from None
            if max_var < 0 or declared_clauses < 0:
                raise ParseError(lineno, "negative counts in header")
            header_seen = True
            continue
        if not header_seen:
            raise ParseError(lineno, "data before header")
        if line.startswith("a"):
            if not incremental:
                raise ParseError(lineno, "assumption line in plain DIMACS")
            if pending:
                raise ParseError(lineno, "assumption line inside an unterminated clause")
            lits = _ints(line.split()[1:], lineno, max_var)
            if not lits or lits[-1] != 0:
                raise ParseError(lineno, "assumption line must end with 0")
            if 0 in lits[:-1]:
                raise ParseError(lineno, "0 inside an assumption line")
            problem.events.append(Query(tuple(lits[:-1])))
            continue
        if not pending:
            pending_line = lineno
        for x in _ints(line.split(), lineno, max_var):
            if x != 0:
                pending.append(x)
                continue
            n_clauses += 1
            clause = make_clause(pending)
            pending = []
            if clause is not None:
                problem.events.append(AddClause(clause))
    if pending:
        raise ParseError(pending_line, "clause is missing its terminating 0")
    if not header_seen:
        raise ParseError(1, "missing header")
    if declared_clauses is not None and n_clauses != declared_clauses:
        raise ParseError(1, f"header declares {declared_clauses} clauses, found {n_clauses}")
    used = max((var_of(l) for e in problem.events
                for l in (e.clause if isinstance(e, AddClause) else e.assumptions)), default=0)
    problem.max_var = max_var if max_var is not None else used
    if not incremental or not any(isinstance(e, Query) for e in problem.events):
        problem.events.append(Query(()))
    return problem


def parse_dimacs(text: str) -> IncrementalProblem:
    return _parse(text, incremental=False)


def parse_icnf(text: str) -> IncrementalProblem:
    return _parse(text, incremental=True)


def parse_any(text: str) -> IncrementalProblem:
    for line in text.splitlines():
        s = line.strip()
        if s.startswith("p"):
            return parse_icnf(text) if s.split()[1:2] == ["inccnf"] else parse_dimacs(text)
    raise ParseError(1, "missing header")


def to_dimacs(problem: IncrementalProblem) -> str:
    clauses = problem.clauses
    lines = [f"p cnf {problem.max_var} {len(clauses)}"]
    lines += [" ".join(map(str, c + (0,))) for c in clauses]
    return "\n".join(lines) + "\n"


def to_icnf(problem: IncrementalProblem) -> str:
    lines = ["p inccnf"]
    for e in problem.events:
        if isinstance(e, AddClause):
            lines.append(" ".join(map(str, e.clause + (0,))))
        else:
            lines.append(" ".join(["a", *map(str, e.assumptions), "0"]))
    return "\n".join(lines) + "\n"


def result_lines(verdict, with_model: bool = False, num_vars: int = 0) -> List[str]:
    if verdict.kind == "SAT":
        out = ["s SATISFIABLE"]
        if with_model and verdict.model is not None:
            n = num_vars or len(verdict.model) - 1
            lits = [v if verdict.model[v] else -v for v in range(1, n + 1)]
            out.append("v " + " ".join(map(str, lits + [0])))
        return out
    if verdict.kind == "UNSAT":
        return ["s UNSATISFIABLE"]
    return ["s UNKNOWN"]


STATS_COLUMNS = [f.name for f in dataclasses.fields(QueryStats)]


def write_stats_csv(stats: Iterable[QueryStats], sink: IO[str], extra: Sequence[str] = ()) -> None:
    """Write one header row and one row per query; ``extra`` names added columns."""
    w = csv.writer(sink, lineterminator="\n")
    w.writerow(STATS_COLUMNS + list(extra))
    for s in stats:
        row = [getattr(s, k) for k in STATS_COLUMNS]
        row += [getattr(s, k, "") for k in extra]
        w.writerow(row)


def read_stats_csv(source: IO[str]) -> List[QueryStats]:
    types = {f.name: f.type for f in dataclasses.fields(QueryStats)}
    out = []
    for row in csv.DictReader(source):
        kw = {}
        for k in STATS_COLUMNS:
            t = types[k]
            v = row[k]
            kw[k] = int(v) if t in (int, "int") else float(v) if t in (float, "float") else v
        out.append(QueryStats(**kw))
    return out
