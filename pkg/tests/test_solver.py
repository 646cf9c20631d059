"""The CDCL engine: queries, propagation, backjumping and eliminated variables."""
import random

import pytest

from bisat.clausedb import INF
from bisat.formats import AddClause
from bisat.generators import random_incremental
from bisat.solver import Solver, SolverError
from oracles import expected_verdicts, satisfies

STRATEGIES = ["vanilla", "base", "al", "comb", "dyn"]


def test_add_clause_goes_to_pervasive_group():
    s = Solver()
    s.add_clause((1, 2))
    assert len(s.db.group(0)) == 1


def test_direct_contradiction():
    s = Solver()
    s.add_clause((1,))
    s.add_clause((-1,))
    assert s.solve([]).kind == "UNSAT"


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_sat_under_assumption(strategy):
    s = Solver(strategy)
    s.add_clause((1, 2))
    v = s.solve([-1])
    assert v.sat and v.value(2) and not v.value(1)


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_unit_chain_conflict(strategy):
    s = Solver(strategy)
    for cl in [(1,), (-1, 2), (-2,)]:
        s.add_clause(cl)
    assert s.solve([]).kind == "UNSAT"


def test_failed_assumptions_form_a_core():
    s = Solver("vanilla")
    for cl in [(-1, 3), (-2, -3), (4, 5)]:
        s.add_clause(cl)
    v = s.solve([4, 1, 2])
    assert v.kind == "UNSAT"
    assert set(v.core) <= {1, 2, 4} and {1, 2} <= {abs(l) for l in v.core}
    assert s.solve([1]).sat


def test_clauses_cannot_be_added_mid_query():
    s = Solver()
    s.in_query = True
    with pytest.raises(SolverError):
        s.add_clause((1, 2))


def test_zero_assumption_rejected():
    with pytest.raises(ValueError):
        Solver().solve([0])


def test_propagation_implies_at_decision_level():
    s = Solver("vanilla")
    s.add_clause((-1, 2))
    s.trail.new_level()
    s.trail.assign(1, None, decision=True)
    assert s.propagate() is None
    assert s.trail.value(2) == 1 and s.trail.level_of(2) == 1


def test_level_zero_conflict_makes_instance_unsat():
    s = Solver("vanilla")
    s.add_clause((1,))
    s.add_clause((-1,))
    assert s.unsat


def _naive_closure(clauses, assigned):
    """Repeated full scans until nothing changes; None on a falsified clause."""
    assigned = set(assigned)
    changed = True
    while changed:
        changed = False
        for cl in clauses:
            if any(l in assigned for l in cl):
                continue
            free = [l for l in cl if -l not in assigned]
            if not free:
                return None
            if len(free) == 1:
                assigned.add(free[0])
                changed = True
    return assigned


@pytest.mark.parametrize("seed", range(200))
def test_propagation_matches_naive_scan(seed):
    rng = random.Random(seed)
    n = rng.randint(4, 15)
    clauses = []
    for _ in range(rng.randint(2, 40)):
        vs = rng.sample(range(1, n + 1), rng.randint(1, min(4, n)))
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    s = Solver("vanilla")
    for cl in clauses:
        s.add_clause(cl)
    base = _naive_closure(clauses, ())
    if s.unsat:
        assert base is None
        return
    assert base == set(s.trail.lits)
    decisions = []
    for v in rng.sample(range(1, n + 1), n):
        if s.trail.vals[v] != 0:
            continue
        l = v if rng.random() < 0.5 else -v
        decisions.append(l)
        s.trail.new_level()
        s.trail.assign(l, None, decision=True)
        confl = s.propagate()
        expect = _naive_closure(clauses, decisions)
        if confl is not None:
            assert expect is None
            assert all(s.trail.vals[x] == -1 for x in confl.lits)
            return
        assert expect == set(s.trail.lits)


def test_backjump_to_current_level_does_nothing():
    s = Solver("al")
    for v in (1, 2, 3):
        s.add_clause((v, 4))
    for v in (1, 2, 3):
        s.trail.new_level()
        s.trail.assign(v, None, decision=True)
    s.bi.m = 3
    s.backjump(3)
    assert s.trail.decision_level == 3 and s.bi_backtrack_calls == 0


def test_backjump_below_m_calls_bi_backtrack_once():
    s = Solver("al")
    for v in (1, 2, 3):
        s.add_clause((v, 4))
    calls = []
    inner = s.bi.backtrack
    s.bi.backtrack = lambda n: (calls.append(n), inner(n))
    for v in (1, 2, 3):
        s.trail.new_level()
        s.trail.assign(v, None, decision=True)
    s.bi.m = 3
    s.backjump(1)
    assert calls == [1] and s.bi.m == 1


@pytest.mark.parametrize("seed", range(60))
def test_bi_backtrack_calls_match_backjumps_below_m(seed):
    rng = random.Random(seed)
    p = random_incremental(rng, max_vars=20, max_clauses=90)
    s = Solver(rng.choice(["al", "comb", "dyn"]))
    trace = []
    jump = s.backjump
    calls = []
    inner = s.bi.backtrack

    def spy_jump(target):
        trace.append(target < s.trail.decision_level and target < s.bi.m)
        jump(target)

    s.backjump = spy_jump
    s.bi.backtrack = lambda n: (calls.append(n), inner(n))
    for e in p.events:
        if isinstance(e, AddClause):
            s.add_clause(e.clause)
        else:
            s.solve(e.assumptions)
    assert len(calls) == sum(trace) == s.bi_backtrack_calls


def test_clause_with_eliminated_variable_triggers_repair():
    s = Solver("base")
    for cl in [(1, 2), (-1, 3), (2, 3, 4), (-2, -3, 4), (4, 5), (-4, -5, 2)]:
        s.add_clause(cl)
    assert s.solve([]).sat
    assert 1 in s.bi.store.order
    before = s.stats()
    s.add_clause((1, 5))
    v = s.solve([])
    after = s.stats()
    assert v.sat and satisfies(v.model, s.inputs)
    assert (after["reeliminations"] + after["reintroductions"]
            > before["reeliminations"] + before["reintroductions"])


def test_assumption_on_eliminated_variable_reintroduces_it():
    s = Solver("base")
    for cl in [(1, 2), (-1, 3), (2, 3, 4), (-2, -3, 4), (4, 5), (-4, -5, 2)]:
        s.add_clause(cl)
    s.solve([])
    assert 1 in s.bi.store.order
    v = s.solve([1, -3])
    assert v.kind == "UNSAT"
    assert 1 not in s.bi.store.eliminated


def test_unit_on_eliminated_variable():
    s = Solver("base")
    for cl in [(1, 2), (-1, 3), (2, 3, 4), (-2, -3, 4), (4, 5), (-4, -5, 2)]:
        s.add_clause(cl)
    s.solve([])
    s.add_clause((-3,))
    v = s.solve([])
    assert v.sat and satisfies(v.model, s.inputs)


def test_learned_clauses_are_temporary():
    s = Solver("vanilla")
    rng = random.Random(4)
    for _ in range(120):
        vs = rng.sample(range(1, 31), 3)
        s.add_clause(tuple(v if rng.random() < 0.5 else -v for v in vs))
    s.solve([])
    assert s.conflicts > 0
    assert all(c.rank == INF for c in s.db.group(INF))
    assert len(s.db.group(0)) <= 120


def test_conflict_budget_gives_unknown():
    from bisat.generators import pigeonhole_incremental
    p = pigeonhole_incremental(7)
    s = Solver("vanilla")
    for c in p.clauses:
        s.add_clause(c)
    v = s.solve(p.queries[-1], conflict_budget=5)
    assert v.kind == "UNKNOWN" and s.trail.decision_level == 0


@pytest.mark.parametrize("strategy", STRATEGIES)
@pytest.mark.parametrize("seed", range(40))
def test_random_instances_against_truth_table(strategy, seed):
    p = random_incremental(random.Random(seed * 7919 + 1))
    s = Solver(strategy, seed=seed)
    expected = iter(expected_verdicts(p))
    for e in p.events:
        if isinstance(e, AddClause):
            s.add_clause(e.clause)
            continue
        v = s.solve(e.assumptions)
        assert v.sat == next(expected)
        if v.sat:
            assert satisfies(v.model, s.inputs)
            assert all(v.value(a) for a in e.assumptions)


@pytest.mark.parametrize("strategy", ["base", "al", "dyn"])
@pytest.mark.parametrize("index", [1489, 1649, 1975, 7825, 8909])
def test_unit_on_eliminated_variable_brings_it_back(strategy, index):
    # reelimination produced a unit on a variable later in the elimination
    # order; reconstruction then overwrote its trail value
    p = random_incremental(random.Random(1_000_003 * index + 17))
    s = Solver(strategy, seed=index)
    expected = iter(expected_verdicts(p))
    for e in p.events:
        if isinstance(e, AddClause):
            s.add_clause(e.clause)
            continue
        v = s.solve(e.assumptions)
        assert v.sat == next(expected)
        if v.sat:
            assert satisfies(v.model, s.inputs)
