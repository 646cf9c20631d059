"""Exhaustive invariant checks for small instances.

Truth tables are packed bitsets: bit ``a`` of a clause's table is set when
the clause is satisfied by assignment number ``a`` over a compact variable
numbering.  Above ``MAX_VARS`` variables the entailment checks report
``Skipped``; the clause-to-clause representation check and the structural
audit are exact at any size and always run.

Report keys, with P the pervasive clauses (rank 0, stashed with restore
level 0, saved with rank 0), N the non-temporary ones and n the level of the
latest inprocessing call:

* ``inv1``: P is equivalent to the input at level 0;
* ``inv2``: N is equivalent to P at level n;
* ``inv3``: every stashed clause has a representative (satisfied by the
  trail, implied by a deputy of no larger rank, or by a clause that will be
  restored no later);
* ``inv4``: every clause is implied by P at level 0;
* ``meta``: whenever ``inv3`` and ``inv4`` hold, ``inv2`` holds too.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .clausedb import INF
from .core import Trail, var_of

MAX_VARS = 20
PASS, FAIL, SKIPPED = "Pass", "Fail", "Skipped"

Clause = Tuple[int, ...]

_columns_cache: Dict[int, np.ndarray] = {}


def _columns(nbits: int) -> np.ndarray:
    """Row ``j`` is the packed truth table of variable ``j`` over ``nbits`` variables."""
    cols = _columns_cache.get(nbits)
    if cols is None:
        idx = np.arange(1 << nbits, dtype=np.uint64)
        rows = [np.packbits(((idx >> np.uint64(j)) & np.uint64(1)).astype(np.uint8),
                            bitorder="little").view(np.uint64) for j in range(nbits)]
        cols = np.stack(rows)
        _columns_cache[nbits] = cols
    return cols


class TruthTables:
    """Packed truth tables over a fixed variable numbering."""

    def __init__(self, variables: Iterable[int]):
        self.index = {v: i for i, v in enumerate(sorted(set(variables)))}
        self.nbits = max(6, len(self.index))
        self.cols = _columns(self.nbits)
        self.words = self.cols.shape[1]
        self.ones = np.full(self.words, np.uint64(0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
        self.zeros = np.zeros(self.words, dtype=np.uint64)
        self._cache: Dict[Clause, np.ndarray] = {}

    def literal(self, l: int) -> np.ndarray:
        col = self.cols[self.index[var_of(l)]]
        return col if l > 0 else ~col

    def clause(self, lits: Clause) -> np.ndarray:
        t = self._cache.get(lits)
        if t is None:
            t = self.zeros.copy()
            for l in lits:
                t |= self.literal(l)
            self._cache[lits] = t
        return t

    def conj(self, clauses: Iterable[Clause]) -> np.ndarray:
        t = self.ones.copy()
        for c in clauses:
            t &= self.clause(c)
        return t

    def prefix_mask(self, trail: Trail, d: int) -> np.ndarray:
        t = self.ones.copy()
        for l in trail.prefix(d):
            if var_of(l) in self.index:
                t &= self.literal(l)
        return t


def entails_at_level(premises: Iterable[Clause], conclusion: Clause, d: int, tau: Trail,
                     max_vars: int = MAX_VARS) -> Optional[bool]:
    """Whether ``premises`` imply ``conclusion`` at level ``d``; None above the bound."""
    premises = [tuple(p) for p in premises]
    conclusion = tuple(conclusion)
    vs = {var_of(l) for c in premises + [conclusion] for l in c}
    if len(vs) > max_vars:
        return None
    tt = TruthTables(vs)
    bad = tt.prefix_mask(tau, d) & tt.conj(premises) & ~tt.clause(conclusion)
    return not bad.any()


def entails_by_enumeration(premises: Iterable[Clause], conclusion: Clause, d: int,
                           tau: Trail) -> bool:
    """Slow reference evaluator used to cross-check the bitset version."""
    premises = [tuple(p) for p in premises]
    fixed = {}
    for l in tau.prefix(d):
        fixed[var_of(l)] = l > 0
    vs = sorted({var_of(l) for c in premises + [tuple(conclusion)] for l in c} - set(fixed))
    for values in itertools.product((False, True), repeat=len(vs)):
        a = dict(fixed)
        a.update(zip(vs, values))

        def sat(c):
            return any(a.get(var_of(l), False) == (l > 0) for l in c)

        if all(sat(c) for c in premises) and not sat(conclusion):
            return False
    return True


def clause_implies_at_level(beta: Clause, alpha: Clause, i: int, tau: Trail) -> bool:
    """beta implies alpha at level i, for single clauses, in closed form."""
    alpha_true = False
    alpha_rest = set()
    for l in alpha:
        fl = tau.false_level(l)
        if fl is not None and fl <= i:
            continue
        tl = tau.true_level(l)
        if tl is not None and tl <= i:
            alpha_true = True
            break
        alpha_rest.add(l)
    if alpha_true:
        return True
    for l in beta:
        tl = tau.true_level(l)
        if tl is not None and tl <= i:
            return False
    for l in beta:
        fl = tau.false_level(l)
        if fl is not None and fl <= i:
            continue
        if l not in alpha_rest:
            return False
    return True


@dataclass
class Snapshot:
    n: int
    trail: Trail
    inputs: List[Clause]
    active: Dict[float, List[Clause]]
    stashed: Dict[Tuple[int, float], List[Clause]]
    saved: List[Tuple[Clause, float]] = field(default_factory=list)
    audit: List[str] = field(default_factory=list)

    @property
    def pervasive(self) -> List[Clause]:
        out = list(self.active.get(0, ()))
        for (i, q), cs in self.stashed.items():
            if q == 0:
                out.extend(cs)
        out.extend(c for c, r in self.saved if r == 0)
        return out

    @property
    def non_temporary(self) -> List[Clause]:
        out = [c for r, cs in self.active.items() if r != INF for c in cs]
        out.extend(c for c, _ in self.saved)
        return out

    def all_clauses(self) -> List[Clause]:
        out = [c for cs in self.active.values() for c in cs]
        out.extend(c for cs in self.stashed.values() for c in cs)
        out.extend(c for c, _ in self.saved)
        return out


def take_snapshot(solver, n: int) -> Snapshot:
    db = solver.db
    t = solver.trail
    trail = Trail(t.num_vars)
    for l, dec in zip(t.lits, t.decision_flags):
        while trail.decision_level < t.level[var_of(l)]:
            trail.new_level()
        trail.assign(l, None, decision=dec)
    while trail.decision_level < t.decision_level:
        trail.new_level()
    active = {r: [c.lits for c in g] for r, g in db.groups.items() if g}
    stashed = {k: [c.lits for c in g] for k, g in db.stashed.items() if g}
    saved = list(solver.bi.store.all_saved())
    return Snapshot(n, trail, list(solver.inputs), active, stashed, saved, db.audit())


@dataclass
class Report:
    results: Dict[str, str] = field(default_factory=dict)
    details: List[str] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return any(v == FAIL for v in self.results.values())

    def summary(self) -> str:
        head = ", ".join(f"{k}={v}" for k, v in self.results.items())
        if self.details:
            head += "; " + "; ".join(self.details[:5])
        return head


def representation_witness(alpha: Clause, i: int, snap: Snapshot) -> Optional[str]:
    """Find what represents stashed ``alpha`` at level ``i``; None if nothing does."""
    tau = snap.trail
    if any((tl := tau.true_level(l)) is not None and tl <= i for l in alpha):
        return "trivial"
    deputies = [(r, c) for r, cs in snap.active.items() if r != INF and r <= i for c in cs]
    deputies += [(r, c) for c, r in snap.saved if r <= i]
    deputies.sort(key=lambda rc: rc[0])
    for r, beta in deputies:
        if clause_implies_at_level(beta, alpha, i, tau):
            return f"deputy@{r}"
    for (j, r) in sorted(snap.stashed):
        if j <= i or r > i:
            continue
        for beta in snap.stashed[(j, r)]:
            if clause_implies_at_level(beta, alpha, i, tau):
                return f"restored@{j}->{r}"
    return None


def check_snapshot(snap: Snapshot, max_vars: int = MAX_VARS) -> Report:
    rep = Report()
    rep.results["audit"] = FAIL if snap.audit else PASS
    rep.details.extend(snap.audit[:5])
    tau, n = snap.trail, snap.n

    inv3 = PASS
    for (i, q), cs in sorted(snap.stashed.items()):
        for alpha in cs:
            if i > n:
                inv3 = FAIL
                rep.details.append(f"clause {alpha} stashed at {i} above level {n}")
                continue
            if representation_witness(alpha, i, snap) is None:
                inv3 = FAIL
                rep.details.append(f"stashed {alpha} at ({i},{q}) has no representative")
    rep.results["inv3"] = inv3

    everything = snap.all_clauses() + list(snap.inputs)
    vs = {var_of(l) for c in everything for l in c}
    if len(vs) > max_vars:
        for k in ("inv1", "inv2", "inv4", "meta"):
            rep.results[k] = SKIPPED
        return rep
    tt = TruthTables(vs)
    m0 = tt.prefix_mask(tau, 0)
    mn = tt.prefix_mask(tau, n)
    p = tt.conj(snap.pervasive)
    i_tab = tt.conj(snap.inputs)
    ok1 = not ((i_tab ^ p) & m0).any()
    rep.results["inv1"] = PASS if ok1 else FAIL
    if not ok1:
        rep.details.append("pervasive clauses differ from the input at level 0")
    ok2 = not ((tt.conj(snap.non_temporary) ^ p) & mn).any()
    rep.results["inv2"] = PASS if ok2 else FAIL
    if not ok2:
        rep.details.append(f"non-temporary clauses differ from pervasive at level {n}")
    pm = p & m0
    ok4 = True
    for c in snap.all_clauses():
        if (pm & ~tt.clause(c)).any():
            ok4 = False
            rep.details.append(f"clause {c} not implied by pervasive clauses")
            break
    rep.results["inv4"] = PASS if ok4 else FAIL
    if inv3 == PASS and ok4:
        rep.results["meta"] = PASS if ok2 else FAIL
    else:
        rep.results["meta"] = SKIPPED
    return rep


def check_solver(solver, n: int) -> Report:
    return check_snapshot(take_snapshot(solver, n))
