"""The six acceptance criteria, each reported as one PASS/FAIL line.

Corpus sizes default to the full criteria and can be scaled down for quick
runs with BISAT_FUZZ_COUNT and BISAT_SCALED_COUNT.
"""
import io
import os
import random
import time

import pytest

from bisat.checker import entails_at_level
from bisat.cli import RunConfig, execute
from bisat.core import Trail, min_satisfaction_level, min_selfsumption_level, \
    min_subsumption_level
from bisat.formats import AddClause, read_stats_csv, to_icnf
from bisat.generators import random_incremental, scaled_suite
from bisat.solver import InvariantViolation, Solver
from bisat.strategies import DYN_CONFLICT_LIMIT, Strategy, StrategyState
from conftest import ACCEPTANCE
from oracles import expected_verdicts, satisfies
from scenarios import conditional_selfsumption, rank_discipline, stash_and_deputy

FUZZ_COUNT = int(os.environ.get("BISAT_FUZZ_COUNT", "10000"))
SCALED_COUNT = int(os.environ.get("BISAT_SCALED_COUNT", "20"))
STRATEGIES = ["vanilla", "base", "al", "comb", "dyn"]


def record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return ok


def corpus():
    for i in range(FUZZ_COUNT):
        yield i, random_incremental(random.Random(1_000_003 * i + 17))


def test_criterion_1_soundness_fuzz():
    t0 = time.time()
    mismatches, bad_models, queries = [], [], 0
    for i, p in corpus():
        expected = expected_verdicts(p)
        for st in STRATEGIES:
            s = Solver(st, seed=i)
            added = []
            k = 0
            for e in p.events:
                if isinstance(e, AddClause):
                    s.add_clause(e.clause)
                    added.append(e.clause)
                    continue
                v = s.solve(e.assumptions)
                queries += 1
                if v.sat != expected[k]:
                    mismatches.append((i, st, k))
                elif v.sat and not (satisfies(v.model, added)
                                    and all(v.value(a) for a in e.assumptions)):
                    bad_models.append((i, st, k))
                k += 1
    ok = not mismatches and not bad_models
    record(1, ok, f"{FUZZ_COUNT} instances, {queries} strategy-queries, "
                  f"{len(mismatches)} verdict mismatches, {len(bad_models)} bad models "
                  f"({time.time() - t0:.0f}s)")
    assert ok, (mismatches[:5], bad_models[:5])


def test_criterion_2_invariant_suite():
    t0 = time.time()
    fails, snapshots, skipped = [], 0, 0
    for i, p in corpus():
        for st in ("base", "al", "comb", "dyn"):
            s = Solver(st, seed=i, check_invariants=True)
            try:
                for e in p.events:
                    if isinstance(e, AddClause):
                        s.add_clause(e.clause)
                    else:
                        s.solve(e.assumptions)
            except InvariantViolation as exc:
                fails.append((i, st, str(exc)))
            snapshots += len(s.invariant_reports)
            skipped += sum(1 for _, _, r in s.invariant_reports
                           if r.results.get("inv1") == "Skipped")
    ok = not fails
    record(2, ok, f"{snapshots} boundary snapshots, {len(fails)} failing, "
                  f"{skipped} above the exhaustive bound ({time.time() - t0:.0f}s)")
    assert ok, fails[:3]


def test_criterion_3_golden_scenarios():
    checks = {}
    db, trail, bi, inputs, alpha, beta = stash_and_deputy()
    checks["stash/deputy"] = (beta.status == ("stashed", 2, 0) and alpha.rank == 2)
    trail.backtrack_to(1)
    bi.backtrack(1)
    checks["restore"] = beta.active and beta.rank == 0 and alpha.rank != 2
    db, trail, bi, inputs, alpha, beta = conditional_selfsumption()
    gammas = db.group(1)
    checks["selfsumption"] = (len(gammas) == 1 and set(gammas[0].lits) == {1, 2, 3}
                              and beta.status == ("stashed", 1, 0))
    a, b, c, d, e, g, h, x = 1, 2, 3, 4, 5, 7, 8, 9
    tau = Trail.from_entries([(e, 1), (-a, 2), (g, 3), (-h, 4)])
    checks["min-levels"] = (
        min_subsumption_level((a, b, c), (d, b, c), tau) == 2
        and min_selfsumption_level((a, b, x), (b, c, -x), x, Trail.from_entries([(-a, 1)])) == 1
        and min_satisfaction_level((a, b, c), Trail.from_entries([(a, 1)])) == 1
        and entails_at_level([(a, b, c)], (d, b, c), 2, tau)
        and not entails_at_level([(a, b, c)], (d, b, c), 1, tau))
    ok = all(checks.values())
    record(3, ok, ", ".join(f"{k}={'ok' if v else 'wrong'}" for k, v in checks.items()))
    assert ok, checks


def test_criterion_4_bve_rank_discipline():
    obs = rank_discipline()
    v, a, b, q = 1, 2, 3, 4
    checks = {
        "rank-2 resolvent": ((a, b), 2) in obs["resolvents"],
        "purge below 2": ((-v, b), 2) in obs["saved_before"]
        and all(r != 2 for _, r in obs["saved_after_backtrack"]),
        "reintroduction": obs["reintroduced"] == sorted([((v, a), 0), ((-v, b, -q), 0)]),
    }
    verdicts = []
    for clauses in (obs["final_active"], obs["inputs"]):
        row = []
        for cube in range(32):
            lits = [i + 1 if cube >> i & 1 else -(i + 1) for i in range(5)]
            s = Solver("vanilla", bve=False)
            for cl in clauses:
                s.add_clause(cl)
            row.append(s.solve(lits).kind)
        verdicts.append(row)
    checks["baseline verdicts"] = verdicts[0] == verdicts[1]
    ok = all(checks.values())
    record(4, ok, ", ".join(f"{k}={'ok' if v else 'wrong'}" for k, v in checks.items()))
    assert ok, checks


def test_criterion_5_dyn_determinism():
    expected = {0: Strategy.AL, 199: Strategy.AL, 200: Strategy.BASE, 2999: Strategy.BASE,
                3000: Strategy.COMB, 10**6: Strategy.COMB}
    got = {}
    exact = True
    for m in expected:
        s = StrategyState(Strategy.DYN)
        s.selfsumption_count, s.inprocess_invocations = m, 1
        for k in range(1, DYN_CONFLICT_LIMIT + 1):
            fired = s.on_conflict_analyzed()
            if fired != (k == DYN_CONFLICT_LIMIT):
                exact = False
        got[m] = s.resolved
    ok = exact and got == expected
    record(5, ok, ", ".join(f"M={m}->{got[m].name if got[m] else None}" for m in expected)
           + f", resolved at conflict {DYN_CONFLICT_LIMIT}: {exact}")
    assert ok


@pytest.mark.slow
def test_criterion_6_scaled_performance(tmp_path):
    t0 = time.time()
    answered = {st: 0 for st in ("vanilla", "al", "dyn")}
    worse = []
    selfsumptions = restorations = 0
    for idx, p in enumerate(scaled_suite(SCALED_COUNT)):
        path = tmp_path / f"inst{idx}.icnf"
        path.write_text(to_icnf(p))
        per = {}
        for st in answered:
            csv_path = tmp_path / f"inst{idx}-{st}.csv"
            r = execute(RunConfig(str(path), st, global_timeout=60.0, stats_csv=str(csv_path)),
                        io.StringIO())
            per[st] = r.bounds_solved
            answered[st] += r.bounds_solved
            if st == "al":
                with open(csv_path) as f:
                    rows = read_stats_csv(f)
                selfsumptions += sum(row.conditional_selfsumptions for row in rows)
                restorations += sum(row.stashed_restorations for row in rows)
        if per["al"] < per["vanilla"] or per["dyn"] < per["vanilla"]:
            worse.append((idx, per))
    ok = not worse and selfsumptions > 0 and restorations > 0
    record(6, ok, f"{SCALED_COUNT} instances, answered vanilla={answered['vanilla']} "
                  f"al={answered['al']} dyn={answered['dyn']}, instances where al/dyn trail "
                  f"vanilla: {len(worse)}, AL conditional selfsumptions={selfsumptions}, "
                  f"restorations={restorations} ({time.time() - t0:.0f}s)")
    assert ok, worse
