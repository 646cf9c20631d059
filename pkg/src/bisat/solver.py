"""Incremental CDCL search hosting the backtrackable inprocessor."""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence

from .clausedb import INF, ClauseDatabase, ClauseRecord
from .core import Trail, make_clause, var_of
from .inprocess import Inprocessor
from .strategies import Metric, Strategy, StrategyState


class SolverError(RuntimeError):
    pass


class InvariantViolation(AssertionError):
    pass


SAT, UNSAT, UNKNOWN = "SAT", "UNSAT", "UNKNOWN"


@dataclass
class Verdict:
    kind: str
    model: Optional[List[bool]] = None  # indexed by variable, slot 0 unused
    core: List[int] = field(default_factory=list)

    @property
    def sat(self) -> bool:
        return self.kind == SAT

    def value(self, literal: int) -> bool:
        if self.model is None:
            raise SolverError("no model available")
        v = var_of(literal)
        val = self.model[v] if v < len(self.model) else False
        return val if literal > 0 else not val


@dataclass
class QueryStats:
    query_index: int = 0
    verdict: str = UNKNOWN
    conflicts: int = 0
    propagations: int = 0
    inprocess_invocations: int = 0
    conditional_selfsumptions: int = 0
    stashed_restorations: int = 0
    eliminations: int = 0
    sumptions: int = 0
    chosen_strategy: str = ""
    wall_time: float = 0.0


def luby(i: int) -> int:
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


class Solver:
    """Incremental solver: ``add_clause`` between queries, ``solve(assumptions)``.

    Every query starts and ends at level 0.  Backjumps below the level of the
    latest inprocessing call are reported to the inprocessor exactly once.
    """

    restart_base = 100
    var_decay = 0.95
    clause_decay = 0.999

    def __init__(self, strategy="dyn", *, keep_bound: int = 6, bve: bool = True,
                 metric="selfsumption", check_invariants: bool = False,
                 checker: Optional[Callable] = None, seed: int = 0):
        self.trail = Trail()
        self.db = ClauseDatabase(self.trail, keep_bound=keep_bound)
        self.bi = Inprocessor(self.db, self.trail, bve=bve)
        self.strategy = StrategyState(Strategy.parse(strategy), metric=Metric(metric))
        self.seed = seed
        self.inputs: List[tuple] = []
        self.unsat = False
        self.in_query = False
        self.qhead = 0
        self.recheck: List[ClauseRecord] = []
        self.activity: List[float] = [0.0]
        self.phase: List[bool] = [False]
        self.order_heap: List[tuple] = []
        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.max_learnts = 2000.0
        self.num_learnts = 0
        self.conflicts = 0
        self.propagations = 0
        self.decisions = 0
        self.bi_backtrack_calls = 0
        self.query_count = 0
        self.query_stats: List[QueryStats] = []
        self.invariant_reports: list = []
        self._simp_len = -1  # trail length at the last level-0 simplification
        self._conflict_budget: Optional[int] = None
        self._deadline: Optional[float] = None
        self.last: Optional[Verdict] = None
        if check_invariants:
            from .checker import check_solver
            self._checker = checker or check_solver
            self.bi.after_call = self._check_boundary
        else:
            self._checker = None

    # -- variables -----------------------------------------------------------
    @property
    def num_vars(self) -> int:
        return self.trail.num_vars

    def _ensure_vars(self, n: int) -> None:
        old = self.trail.num_vars
        if n <= old:
            return
        self.db.ensure_vars(n)
        self.activity.extend([0.0] * (n - old))
        self.phase.extend([False] * (n - old))
        for v in range(old + 1, n + 1):
            heapq.heappush(self.order_heap, (0.0, v))

    # -- clauses ---------------------------------------------------------------
    def add_clause(self, literals: Iterable[int]) -> None:
        if self.in_query:
            raise SolverError("clauses can only be added between queries")
        lits = make_clause(literals)
        if lits is None:
            return
        self.inputs.append(lits)
        if self.unsat:
            return
        if lits:
            self._ensure_vars(max(var_of(l) for l in lits))
        vals = self.trail.vals
        if any(vals[l] == 1 for l in lits):
            return
        lits = tuple(l for l in lits if vals[l] == 0)
        if len(lits) <= 1:
            if not lits:
                self.unsat = True
                return
            v = var_of(lits[0])
            if self.bi.is_eliminated(v):
                self.bi.reintroduce([v])
                self._collect_activated()
            self.trail.assign(lits[0])
            if self._propagate_level_zero() is not None:
                self.unsat = True
            return
        c = self.db.add(lits, 0)
        self.bi.note_activated([c])
        self._collect_activated()

    def _collect_activated(self) -> None:
        act = self.db.take_activated()
        if act:
            self.bi.note_activated(act)
            self.recheck.extend(act)

    def _propagate_level_zero(self):
        while True:
            confl = self.propagate()
            if confl is not None:
                return confl
            confl = self._recheck_pending()
            if confl is not None:
                return confl
            if self.qhead == len(self.trail.lits):
                return None

    # -- propagation -------------------------------------------------------------
    def propagate(self) -> Optional[ClauseRecord]:
        trail = self.trail
        vals = trail.vals
        watches = self.db.watches
        lits = trail.lits
        props = 0
        while self.qhead < len(lits):
            p = lits[self.qhead]
            self.qhead += 1
            props += 1
            fl = -p
            ws = watches[fl]
            i = j = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                other = c.w1 if c.w0 == fl else c.w0
                if vals[other] == 1:
                    ws[j] = c
                    j += 1
                    continue
                moved = False
                for l in c.lits:
                    if l != other and l != fl and vals[l] != -1:
                        if c.w0 == fl:
                            c.w0 = l
                        else:
                            c.w1 = l
                        watches[l].append(c)
                        moved = True
                        break
                if moved:
                    continue
                ws[j] = c
                j += 1
                if vals[other] == -1:
                    while i < n:
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                    del ws[j:]
                    self.propagations += props
                    return c
                trail.assign(other, c if trail.lim else None)
            del ws[j:]
        self.propagations += props
        return None

    def _recheck_pending(self) -> Optional[ClauseRecord]:
        """Evaluate clauses activated mid-search; assign units, return a conflict."""
        trail = self.trail
        vals = trail.vals
        pending = self.recheck
        while pending:
            c = pending.pop()
            if not c.active:
                continue
            free = 0
            unit = 0
            done = False
            for l in c.lits:
                v = vals[l]
                if v == 1:
                    done = True
                    break
                if v == 0:
                    free += 1
                    unit = l
                    if free > 1:
                        done = True
                        break
            if done:
                continue
            if free == 0:
                return c
            trail.assign(unit, c if trail.lim else None)
        return None

    # -- backjumping -------------------------------------------------------------
    def backjump(self, target: int) -> None:
        trail = self.trail
        if target >= trail.decision_level:
            return
        removed = trail.backtrack_to(target)
        phase, act, heap = self.phase, self.activity, self.order_heap
        for l in removed:
            v = l if l > 0 else -l
            phase[v] = l > 0
            heapq.heappush(heap, (-act[v], v))
        if self.qhead > len(trail.lits):
            self.qhead = len(trail.lits)
        if target < self.bi.m:
            self.bi_backtrack_calls += 1
            self.bi.backtrack(target)
            self._collect_activated()

    # -- heuristics --------------------------------------------------------------
    def _bump_var(self, v: int) -> None:
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for i in range(1, len(act)):
                act[i] *= 1e-100
            self.var_inc *= 1e-100
            self.order_heap = [(-act[u], u) for u in range(1, len(act))]
            heapq.heapify(self.order_heap)
        else:
            heapq.heappush(self.order_heap, (-act[v], v))

    def _bump_clause(self, c: ClauseRecord) -> None:
        c.activity += self.cla_inc
        if c.activity > 1e20:
            for d in self.db.group(INF):
                d.activity *= 1e-20
            self.cla_inc *= 1e-20

    def _pick_branch(self) -> int:
        heap = self.order_heap
        vals = self.trail.vals
        act = self.activity
        elim = self.bi.store.eliminated
        while heap:
            a, v = heapq.heappop(heap)
            if -a != act[v] or vals[v] != 0 or v in elim:
                continue
            return v if self.phase[v] else -v
        for v in range(1, self.trail.num_vars + 1):
            if vals[v] == 0 and v not in elim:
                return v if self.phase[v] else -v
        return 0

    # -- conflicts ---------------------------------------------------------------
    def _handle_conflict(self, confl: ClauseRecord) -> bool:
        """Resolve a conflict; False means the clause set is unsatisfiable."""
        trail = self.trail
        level = trail.level
        top = max(level[var_of(l)] for l in confl.lits)
        if top == 0:
            return False
        self.conflicts += 1
        self._sync_strategy()
        self.strategy.on_conflict_analyzed()
        if top < trail.decision_level:
            self.backjump(top)
        at_top = [l for l in confl.lits if level[var_of(l)] == top]
        if len(at_top) == 1:
            second = max((level[var_of(l)] for l in confl.lits if l != at_top[0]), default=0)
            self.backjump(second)
            trail.assign(at_top[0], confl if trail.lim else None)
            return True
        learnt, bt = self._analyze(confl)
        self.backjump(bt)
        if len(learnt) == 1:
            trail.assign(learnt[0], None)
        else:
            c = self.db.add(tuple(learnt), INF, notify=False)
            self._bump_clause(c)
            self.num_learnts += 1
            trail.assign(learnt[0], c)
        self.var_inc /= self.var_decay
        self.cla_inc /= self.clause_decay
        return True

    def _analyze(self, confl: ClauseRecord):
        trail = self.trail
        level = trail.level
        reason = trail.reason
        dl = trail.decision_level
        seen = set()
        learnt = [0]
        pending = 0
        idx = len(trail.lits) - 1
        c = confl
        p = 0
        while True:
            if c.rank == INF:
                self._bump_clause(c)
            for q in c.lits:
                if q == p:
                    continue
                v = var_of(q)
                if v in seen or level[v] == 0:
                    continue
                seen.add(v)
                self._bump_var(v)
                if level[v] >= dl:
                    pending += 1
                else:
                    learnt.append(q)
            while var_of(trail.lits[idx]) not in seen:
                idx -= 1
            p = trail.lits[idx]
            idx -= 1
            pending -= 1
            if pending == 0:
                break
            c = reason[var_of(p)]
            if c is None:
                raise SolverError("reason missing for an implied literal during analysis")
        learnt[0] = -p
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda i: level[var_of(learnt[i])])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[var_of(learnt[1])]

    def _analyze_final(self, failed: int) -> List[int]:
        """Assumptions responsible for ``failed`` being false."""
        trail = self.trail
        core = [failed]
        v0 = var_of(failed)
        if trail.level[v0] == 0:
            return core
        seen = {v0}
        start = trail.lim[0]
        for i in range(len(trail.lits) - 1, start - 1, -1):
            l = trail.lits[i]
            v = var_of(l)
            if v not in seen:
                continue
            r = trail.reason[v]
            if r is None:
                if trail.level[v] > 0:
                    core.append(l)
            else:
                for q in r.lits:
                    u = var_of(q)
                    if trail.level[u] > 0:
                        seen.add(u)
        return core

    def _reduce_db(self) -> None:
        learnts = [c for c in self.db.group(INF) if len(c.lits) > 2]
        learnts.sort(key=lambda c: c.activity)
        for c in learnts[: len(learnts) // 2]:
            if not self.db.is_reason(c):
                self.db.remove(c)
        self.num_learnts = len(self.db.groups.get(INF, ()))

    # -- level-0 simplification ---------------------------------------------------
    def _simplify_level_zero(self) -> bool:
        """Drop satisfied clauses and false literals at level 0; False on a conflict.

        Clauses that became unit at level 0 without being propagated (their
        implication was made at a higher level and later undone) are asserted
        here.
        """
        trail = self.trail
        if trail.decision_level != 0:
            return True
        db = self.db
        while len(trail.lits) != self._simp_len:
            if self._propagate_level_zero() is not None:
                return False
            self._simp_len = len(trail.lits)
            vals = trail.vals
            for c in list(db.active_clauses()):
                if any(vals[l] == 1 for l in c.lits):
                    db.remove(c)
                    continue
                if not any(vals[l] == -1 for l in c.lits):
                    continue
                rest = tuple(l for l in c.lits if vals[l] == 0)
                if not rest:
                    return False
                if len(rest) == 1:
                    db.remove(c)
                    trail.assign(rest[0], None)
                else:
                    db.replace_literals(c, rest)
            db.take_activated()
        return True

    # -- inprocessing ------------------------------------------------------------
    def _sync_strategy(self) -> None:
        s, bi = self.strategy, self.bi
        s.selfsumption_count = bi.conditional_selfsumptions
        s.inprocess_invocations = bi.invocations
        s.restoration_count = bi.restorations

    def _inprocess(self) -> None:
        self.bi.inprocess(self.trail.decision_level)
        self._sync_strategy()
        self._collect_activated()
        if self.bi.empty:
            self.unsat = True
            return
        if self.bi.units:
            units, self.bi.units = self.bi.units, []
            trail = self.trail
            # units already fixed at level 0 need no backjump; skipping them
            # keeps a repair round from restarting the query forever
            units = [u for u in units if not (trail.vals[u] == 1 and trail.level[var_of(u)] == 0)]
            if not units:
                return
            self.backjump(0)
            vals = trail.vals
            for u in units:
                if vals[u] == -1:
                    self.unsat = True
                    return
                if vals[u] == 0:
                    self.trail.assign(u, None)
                if self.bi.is_eliminated(var_of(u)):
                    # a resolvent made while repairing an earlier variable can
                    # be a unit on a later one; that variable must come back
                    self.bi.repair_pending = True

    def _check_boundary(self, kind: str, n: int) -> None:
        report = self._checker(self, n)
        self.invariant_reports.append((kind, n, report))
        if report.failed:
            raise InvariantViolation(f"after {kind}({n}): {report.summary()}")

    # -- queries -----------------------------------------------------------------
    def solve(self, assumptions: Sequence[int] = (), *, conflict_budget: Optional[int] = None,
              timeout: Optional[float] = None) -> Verdict:
        if self.in_query:
            raise SolverError("a query is already running")
        assumptions = [int(a) for a in assumptions]
        if any(a == 0 for a in assumptions):
            raise ValueError("0 is not a literal")
        self.in_query = True
        self._conflict_budget = None if conflict_budget is None else self.conflicts + conflict_budget
        self._deadline = None if timeout is None else time.monotonic() + timeout
        before = self._counters()
        label = self.strategy.label
        t0 = time.perf_counter()
        try:
            verdict = self._search(assumptions)
        finally:
            self.backjump(0)
            self.in_query = False
            self.bi.frozen = set()
        after = self._counters()
        self.query_count += 1
        self.query_stats.append(QueryStats(
            query_index=self.query_count, verdict=verdict.kind,
            chosen_strategy=label, wall_time=time.perf_counter() - t0,
            **{k: after[k] - before[k] for k in after}))
        self.last = verdict
        return verdict

    def _counters(self) -> dict:
        bi = self.bi
        return {"conflicts": self.conflicts, "propagations": self.propagations,
                "inprocess_invocations": bi.invocations,
                "conditional_selfsumptions": bi.conditional_selfsumptions,
                "stashed_restorations": bi.restorations,
                "eliminations": bi.eliminations, "sumptions": bi.sumptions}

    def _out_of_budget(self) -> bool:
        if self._conflict_budget is not None and self.conflicts >= self._conflict_budget:
            return True
        return self._deadline is not None and time.monotonic() > self._deadline

    def _search(self, assumptions: List[int]) -> Verdict:
        if self.unsat:
            return Verdict(UNSAT)
        trail = self.trail
        if assumptions:
            self._ensure_vars(max(var_of(a) for a in assumptions))
        avars = {var_of(a) for a in assumptions}
        back = [v for v in avars if self.bi.is_eliminated(v)]
        if back:
            self.bi.reintroduce(back)
            self._collect_activated()
        if not self._simplify_level_zero():
            self.unsat = True
            return Verdict(UNSAT)
        plan = self.strategy.on_query_start(assumptions)
        self.bi.frozen = set(plan["freeze"]) | avars
        vanilla = self.strategy.configured is Strategy.VANILLA
        if plan["level_zero"]:
            self._inprocess()
        al_pending = plan["after_assumptions"]
        restarts = 0
        next_restart = self.conflicts + self.restart_base * luby(restarts)
        while True:
            if self.unsat:
                return Verdict(UNSAT)
            confl = self.propagate()
            if confl is None:
                confl = self._recheck_pending()
                if confl is None and self.qhead < len(trail.lits):
                    continue
            if confl is not None:
                if not self._handle_conflict(confl):
                    self.unsat = True
                    return Verdict(UNSAT)
                continue
            dl = trail.decision_level
            if dl < len(assumptions):
                a = assumptions[dl]
                val = trail.vals[a]
                if val == -1:
                    return Verdict(UNSAT, core=self._analyze_final(a))
                trail.new_level()
                if val == 0:
                    trail.assign(a, None, decision=True)
                continue
            if self._out_of_budget():
                return Verdict(UNKNOWN)
            if al_pending:
                al_pending = False
                self._inprocess()
                continue
            if not vanilla and self.bi.needs_repair:
                self._inprocess()
                continue
            if self.conflicts >= next_restart and dl > len(assumptions):
                restarts += 1
                next_restart = self.conflicts + self.restart_base * luby(restarts)
                self.backjump(len(assumptions))
                continue
            if self.num_learnts - len(trail.lits) >= self.max_learnts:
                self._reduce_db()
                self.max_learnts *= 1.1
            lit = self._pick_branch()
            if lit == 0:
                return Verdict(SAT, model=self._model())
            self.decisions += 1
            trail.new_level()
            trail.assign(lit, None, decision=True)

    def _model(self) -> List[bool]:
        vals = self.trail.vals
        partial = [False] + [vals[v] == 1 for v in range(1, self.trail.num_vars + 1)]
        return self.bi.store.reconstruct_model(partial)

    # -- accessors -----------------------------------------------------------------
    def model(self) -> Optional[List[bool]]:
        return self.last.model if self.last else None

    def core(self) -> List[int]:
        return list(self.last.core) if self.last else []

    def stats(self) -> dict:
        out = self._counters()
        out.update(decisions=self.decisions, queries=self.query_count,
                   bi_backtrack_calls=self.bi_backtrack_calls,
                   eliminated=len(self.bi.store), active=self.db.num_active(),
                   reeliminations=self.bi.eliminator.reeliminations,
                   reintroductions=self.bi.eliminator.reintroductions,
                   stashed=self.db.num_stashed(), strategy=self.strategy.label)
        return out
