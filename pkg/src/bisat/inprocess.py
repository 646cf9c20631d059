"""Backtrackable inprocessing: conditional sumption, satisfied-clause stashing,
bounded variable elimination and the matching backtrack step.

The inprocessor never touches the trail.  Units it derives are collected in
``units`` for the engine to assert at level 0, and clauses it activates are
left in ``db.activated`` so the engine can check them under the trail.
"""
from __future__ import annotations

from typing import Callable, Iterable, List, NamedTuple, Optional, Set

from .bve import Eliminator, EliminationStore
from .clausedb import INF, ClauseDatabase, ClauseRecord
from .core import Trail, min_satisfaction_level, min_selfsumption_level, \
    min_subsumption_level, resolve, var_of


class SumptionFinding(NamedTuple):
    kind: str  # 'subsumes' | 'selfsumes'
    sumer: ClauseRecord
    sumed: ClauseRecord
    level: int
    pivot: int = 0  # literal of the sumer that is resolved away


class Inprocessor:
    """Owns the elimination store and runs every inprocessing call."""

    def __init__(self, db: ClauseDatabase, trail: Trail, *, bve: bool = True,
                 selfsumption_limit: int = 3, step_limit: int = 400_000):
        self.db = db
        self.trail = trail
        self.bve_enabled = bve
        self.selfsumption_limit = selfsumption_limit
        self.step_limit = step_limit
        self.units: List[int] = []
        self.empty = False
        self.store = EliminationStore()
        self.eliminator = Eliminator(db, trail, self.store,
                                     on_unit=self._found_unit, on_empty=self._found_empty)
        self.m = 0
        self.frozen: Set[int] = set()
        self.repair_pending = False
        self.after_call: Optional[Callable[[str, int], None]] = None
        self._restored: List[ClauseRecord] = []
        self._touched: Set[int] = set()
        self._steps = 0
        self._unit_vars: Set[int] = set()
        # counters
        self.invocations = 0
        self.conditional_selfsumptions = 0
        self.global_selfsumptions = 0
        self.subsumptions = 0
        self.conditional_subsumptions = 0
        self.satisfied_stashes = 0
        self.satisfied_deletions = 0
        self.restorations = 0
        self.backtracks = 0

    def _found_empty(self) -> None:
        self.empty = True

    def _found_unit(self, l: int) -> None:
        t = self.trail
        if t.vals[l] == 1 and t.level[var_of(l)] == 0:
            return
        # the variable must stay around until the engine asserts the unit
        self.units.append(l)
        self._unit_vars.add(var_of(l))

    # -- counters ----------------------------------------------------------
    @property
    def eliminations(self) -> int:
        return self.eliminator.eliminations + self.eliminator.reeliminations

    @property
    def sumptions(self) -> int:
        return (self.subsumptions + self.conditional_subsumptions
                + self.global_selfsumptions + self.conditional_selfsumptions)

    # -- eliminated-variable bookkeeping -------------------------------------
    def is_eliminated(self, v: int) -> bool:
        return v in self.store.eliminated

    def note_activated(self, clauses: Iterable[ClauseRecord]) -> None:
        """Flag a pending repair when an active clause mentions an eliminated variable."""
        elim = self.store.eliminated
        if not elim:
            return
        for c in clauses:
            if c.active and any(var_of(l) in elim for l in c.lits):
                self.repair_pending = True
                return

    @property
    def needs_repair(self) -> bool:
        if not self.repair_pending:
            return False
        occ = self.db.occ
        vals = self.trail.vals
        for v in self.store.order:
            if occ.get(v) or occ.get(-v) or vals[v] != 0:
                return True
        self.repair_pending = False
        return False

    def reintroduce(self, variables: Iterable[int]) -> None:
        for v in variables:
            if v in self.store.eliminated:
                self.eliminator.reintroduce(v)
        self.note_activated(self.db.activated)

    # -- the two calls -------------------------------------------------------
    def inprocess(self, n: int) -> None:
        if n != self.trail.decision_level:
            raise ValueError(f"inprocess({n}) called at level {self.trail.decision_level}")
        self.invocations += 1
        self._steps = 0
        self._touched = set()
        self._unit_vars = {var_of(l) for l in self.units}
        fresh = self.db.take_fresh()
        self.stash_satisfied(n)
        if self.bve_enabled and self.store.order:
            self.eliminator.repair_eliminated(self.frozen)
        self.repair_pending = False
        db = self.db
        db.clear_queue()
        vals = self.trail.vals
        seeds = fresh + self._restored + self.eliminator.added
        self._restored = []
        self.eliminator.added = []
        for l in self.trail.lits:
            seeds.extend(db.occ.get(-l, ()))
        candidates: Set[int] = set()
        for c in seeds:
            if c.active and not any(vals[x] == 1 for x in c.lits):
                db.push(c)
                candidates.update(var_of(x) for x in c.lits)
        while not self.empty:
            self._sumption_fixpoint(n)
            if not self.bve_enabled or self.empty:
                break
            candidates |= self._touched
            self._touched = set()
            if not self._eliminate_round(candidates):
                break
            candidates = set(self.eliminator.removed_vars)
            self.eliminator.removed_vars = set()
            for c in self.eliminator.added:
                db.push(c)
                candidates.update(var_of(x) for x in c.lits)
            self.eliminator.added = []
        db.clear_queue()
        for c in db.active_clauses():
            c.skip_round = False
        self.m = n
        if self.after_call:
            self.after_call("inprocess", n)

    def backtrack(self, n: int) -> None:
        """Undo every level above ``n`` after the engine backtracked to ``n``."""
        if self.trail.decision_level > n:
            raise ValueError("engine must backtrack before the inprocessor")
        self.backtracks += 1
        db = self.db
        top = max(self.m, db.max_bi_level(), int(self.store.max_rank()))
        for i in range(top, n, -1):
            restored = db.restore_level(i)
            self.restorations += len(restored)
            self._restored.extend(restored)
            self.store.purge_rank(i)
        self.note_activated(db.activated)
        self.m = n
        if self.after_call:
            self.after_call("backtrack", n)

    # -- satisfied clauses ---------------------------------------------------
    def stash_satisfied(self, n: int) -> None:
        db = self.db
        for c in list(db.active_clauses()):
            d = min_satisfaction_level(c.lits, self.trail)
            if d is None:
                continue
            if d == 0:
                if not db.is_reason(c):
                    db.remove(c)
                    self.satisfied_deletions += 1
                continue
            if c.rank == INF or c.rank >= d or db.is_reason(c):
                continue
            db.stash(c, d, c.rank)
            self.satisfied_stashes += 1

    # -- sumption ------------------------------------------------------------
    def _sumption_fixpoint(self, n: int) -> None:
        db = self.db
        while self._steps < self.step_limit and not self.empty:
            alpha = db.pop_smallest_active()
            if alpha is None:
                break
            self._backward(alpha, n)

    def _backward(self, alpha: ClauseRecord, n: int) -> None:
        db = self.db
        vals = self.trail.vals
        live = []
        for l in alpha.lits:
            v = vals[l]
            if v == 1:
                return
            if v == 0:
                live.append(l)
        if not live:
            return
        occ = db.occ
        pivot = min(live, key=lambda l: len(occ.get(l, ())) + len(occ.get(-l, ())))
        cands = list(occ.get(pivot, ())) + list(occ.get(-pivot, ()))
        for beta in cands:
            if not alpha.active:
                return
            if beta is alpha or not beta.active or beta.skip_round:
                continue
            self._steps += 1
            finding = self.find(alpha, beta, live)
            if finding is not None:
                self.apply(finding, n)

    def find(self, alpha: ClauseRecord, beta: ClauseRecord,
             live: Optional[List[int]] = None) -> Optional[SumptionFinding]:
        """Minimal-level subsumption or selfsumption of ``beta`` by ``alpha``."""
        bset = set(beta.lits)
        k = min_subsumption_level(alpha.lits, bset, self.trail)
        if k is not None:
            return SumptionFinding("subsumes", alpha, beta, k)
        if live is None:
            vals = self.trail.vals
            live = [l for l in alpha.lits if vals[l] != -1]
        missing = [l for l in live if l not in bset]
        if len(missing) != 1 or -missing[0] not in bset:
            return None
        x = missing[0]
        k = min_selfsumption_level(alpha.lits, beta.lits, x, self.trail)
        if k is None:
            return None
        return SumptionFinding("selfsumes", alpha, beta, k, x)

    def apply(self, f: SumptionFinding, n: int) -> bool:
        """Carry out one finding; returns False when reason protection vetoed it."""
        if f.kind == "subsumes":
            ok = self._subsume(f.sumer, f.sumed, f.level)
            if ok:
                if f.level == 0:
                    self.subsumptions += 1
                else:
                    self.conditional_subsumptions += 1
            return ok
        alpha, beta, k, x = f.sumer, f.sumed, f.level, f.pivot
        db = self.db
        if k == 0:
            if db.is_reason(beta):
                return False
            lits = tuple(l for l in beta.lits if l != -x)
            self.global_selfsumptions += 1
            self._touched.add(var_of(x))
            if len(lits) == 1:
                # the strengthened clause is a unit; it goes on the trail
                self._found_unit(lits[0])
                return True
            db.replace_literals(beta, lits)
            db.push(beta)
            return True
        vals = self.trail.vals
        if sum(1 for l in beta.lits if vals[l] == 0) > self.selfsumption_limit:
            return False
        b = beta.rank
        if (b < k or b == INF) and db.is_reason(beta):
            return False
        gamma_lits = resolve(alpha.lits, beta.lits, x)
        if gamma_lits is None:
            return False
        if len(gamma_lits) <= 1:
            if gamma_lits:
                self._found_unit(gamma_lits[0])
            else:
                self.empty = True
            return True
        gamma = db.add(gamma_lits, INF)
        self._subsume(gamma, beta, k)
        self.conditional_selfsumptions += 1
        db.push(gamma)
        return True

    def _subsume(self, alpha: ClauseRecord, beta: ClauseRecord, k: int) -> bool:
        db = self.db
        a, b = alpha.rank, beta.rank
        if b < k:
            if db.is_reason(beta):
                return False
            if a > k:
                db.promote(alpha, k)
            db.stash(beta, k, b)
        elif b == INF:
            if db.is_reason(beta):
                return False
            db.delete_or_demote(beta, demote=False)
        else:
            if a > b:
                db.promote(alpha, b)
            demote = db.is_reason(beta) or (k > 0 and len(beta.lits) <= db.keep_bound)
            db.delete_or_demote(beta, demote=demote)
            if demote:
                beta.skip_round = True
        self._touched.update(var_of(l) for l in beta.lits)
        return True

    # -- elimination -----------------------------------------------------------
    def _eliminate_round(self, candidates: Set[int]) -> bool:
        occ = self.db.occ
        vals = self.trail.vals
        order = sorted((v for v in candidates
                        if v <= self.trail.num_vars and vals[v] == 0
                        and v not in self.store.eliminated and v not in self.frozen),
                       key=lambda v: (len(occ.get(v, ())) + len(occ.get(-v, ())), v))
        any_eliminated = False
        for v in order:
            if self.empty:
                break
            if v in self._unit_vars:
                continue
            if self.eliminator.try_eliminate(v, self.frozen):
                any_eliminated = True
        return any_eliminated
