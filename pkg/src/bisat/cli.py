"""Command-line runner for DIMACS and incremental CNF files."""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .formats import AddClause, ParseError, Query, parse_any, result_lines, write_stats_csv
from .solver import InvariantViolation, Solver
from .strategies import Strategy


@dataclass
class RunConfig:
    input: str
    strategy: str = "dyn"
    stop_at_first_sat: bool = False
    per_query_timeout: Optional[float] = None
    global_timeout: Optional[float] = None
    check_invariants: bool = False
    stats_csv: Optional[str] = None
    seed: int = 0
    metric: str = "selfsumption"
    print_model: bool = False
    abort_on_timeout: bool = False

    def __post_init__(self):
        for name in ("per_query_timeout", "global_timeout"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")
        Strategy.parse(self.strategy)


@dataclass
class RunResult:
    verdicts: List[str]
    bounds_solved: int
    exit_status: int
    stats: list


def execute(config: RunConfig, out=None) -> RunResult:
    out = out or sys.stdout
    if config.input == "-":
        text = sys.stdin.read()
    else:
        with open(config.input, encoding="utf-8") as f:
            text = f.read()
    problem = parse_any(text)
    solver = Solver(config.strategy, metric=config.metric,
                    check_invariants=config.check_invariants, seed=config.seed)
    solver._ensure_vars(problem.max_var)
    deadline = None if config.global_timeout is None else time.monotonic() + config.global_timeout
    verdicts = []
    stopped = False
    for e in problem.events:
        if isinstance(e, AddClause):
            solver.add_clause(e.clause)
            continue
        budget = config.per_query_timeout
        if deadline is not None:
            left = deadline - time.monotonic()
            if left <= 0:
                break
            budget = left if budget is None else min(budget, left)
        v = solver.solve(e.assumptions, timeout=budget)
        verdicts.append(v.kind)
        for line in result_lines(v, config.print_model, problem.max_var):
            print(line, file=out)
        if v.kind == "UNKNOWN" and (config.abort_on_timeout or deadline is not None
                                    and time.monotonic() >= deadline):
            break
        if v.kind == "SAT" and config.stop_at_first_sat:
            stopped = True
            break
    bounds = sum(1 for v in verdicts if v != "UNKNOWN")
    stats = solver.query_stats
    for s in stats:
        s.bounds_solved = bounds
    print(f"c bounds solved {bounds}", file=out)
    if config.stats_csv:
        with open(config.stats_csv, "w", encoding="utf-8", newline="") as f:
            write_stats_csv(stats, f, extra=("bounds_solved",))
    last = verdicts[-1] if verdicts else "UNKNOWN"
    if len(problem.queries) == 1 or stopped:
        status = {"SAT": 10, "UNSAT": 20}.get(last, 0)
    else:
        status = 0
    return RunResult(verdicts, bounds, status, stats)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bisat", description=__doc__)
    p.add_argument("input", help="DIMACS or incremental CNF file ('-' for stdin)")
    p.add_argument("--strategy", default="dyn", choices=[s.value for s in Strategy])
    p.add_argument("--stop-at-first-sat", action="store_true")
    p.add_argument("--timeout", type=float, default=None, help="global wall-clock limit (s)")
    p.add_argument("--query-timeout", type=float, default=None, help="per-query limit (s)")
    p.add_argument("--abort-on-timeout", action="store_true",
                   help="stop after the first query that times out")
    p.add_argument("--check-invariants", action="store_true")
    p.add_argument("--stats-csv", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--metric", default="selfsumption", choices=["selfsumption", "restoration"])
    p.add_argument("--model", action="store_true", help="print 'v' model lines")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig(args.input, args.strategy, args.stop_at_first_sat, args.query_timeout,
                           args.timeout, args.check_invariants, args.stats_csv, args.seed,
                           args.metric, args.model, args.abort_on_timeout)
        return execute(config).exit_status
    except (OSError, ParseError, ValueError) as exc:
        print(f"c error: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"c invariant violation: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
