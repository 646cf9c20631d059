"""Bounded variable elimination that keeps clause ranks.

Saved clauses keep the rank they had when their variable was eliminated,
resolvents take the larger rank of their two parents, and backtracking below
a level drops the saved clauses of that rank.
"""
from __future__ import annotations

from collections import defaultdict
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .clausedb import INF, ClauseDatabase, ClauseRecord
from .core import Trail, resolve, var_of

OCC_LIMIT = 1000

Saved = Tuple[Tuple[int, ...], int]


class ReconstructionError(RuntimeError):
    pass


class EliminationStore:
    """Elimination order plus the saved clauses of every eliminated variable."""

    def __init__(self):
        self.order: List[int] = []
        self.eliminated: Set[int] = set()
        self.pos: Dict[int, List[Saved]] = defaultdict(list)
        self.neg: Dict[int, List[Saved]] = defaultdict(list)
        self.resolvents: Dict[int, List[ClauseRecord]] = defaultdict(list)

    def __contains__(self, v: int) -> bool:
        return v in self.eliminated

    def __len__(self) -> int:
        return len(self.order)

    def saved(self, v: int) -> List[Saved]:
        return self.pos.get(v, []) + self.neg.get(v, [])

    def all_saved(self) -> Iterable[Saved]:
        for v in self.order:
            yield from self.pos.get(v, ())
            yield from self.neg.get(v, ())

    def max_rank(self) -> int:
        return max((r for _, r in self.all_saved()), default=0)

    def purge_rank(self, i: int) -> int:
        """Drop every saved clause of rank ``i``; return how many were dropped."""
        dropped = 0
        for table in (self.pos, self.neg):
            for v, entries in table.items():
                kept = [e for e in entries if e[1] != i]
                dropped += len(entries) - len(kept)
                table[v] = kept
        return dropped

    def drop(self, v: int) -> None:
        self.eliminated.discard(v)
        self.order.remove(v)
        self.pos.pop(v, None)
        self.neg.pop(v, None)
        self.resolvents.pop(v, None)

    def reconstruct_model(self, partial: Sequence[bool]) -> List[bool]:
        """Extend a model of the active clauses to the eliminated variables.

        ``partial`` is indexed by variable (index 0 unused); the values of
        eliminated variables are overwritten walking the order backwards.
        """
        model = list(partial)
        for v in reversed(self.order):
            if v >= len(model):
                model.extend([False] * (v + 1 - len(model)))
            value = False
            for lits, _ in self.pos.get(v, ()):
                if not _satisfied_without(lits, v, model):
                    value = True
                    break
            model[v] = value
            for lits, _ in self.saved(v):
                if not _satisfied_without(lits, 0, model):
                    raise ReconstructionError(
                        f"no value of {v} satisfies saved clause {lits}")
        return model


def _satisfied_without(lits, skip: int, model) -> bool:
    for l in lits:
        v = l if l > 0 else -l
        if v == skip:
            continue
        if model[v] == (l > 0):
            return True
    return False


class Eliminator:
    """Runs elimination, reelimination and reintroduction against a database.

    ``on_unit`` receives unit resolvents (they belong on the trail, not in the
    database); ``on_empty`` is called when an empty resolvent appears.
    """

    def __init__(self, db: ClauseDatabase, trail: Trail, store: Optional[EliminationStore] = None,
                 on_unit: Optional[Callable[[int], None]] = None,
                 on_empty: Optional[Callable[[], None]] = None):
        self.db = db
        self.trail = trail
        self.store = store if store is not None else EliminationStore()
        self.on_unit = on_unit or (lambda l: None)
        self.on_empty = on_empty or (lambda: None)
        self.eliminations = 0
        self.reeliminations = 0
        self.reintroductions = 0
        self.added: List[ClauseRecord] = []
        self.removed_vars: Set[int] = set()

    # -- helpers ----------------------------------------------------------
    def _split(self, v: int):
        occ = self.db.occ
        pos = [c for c in occ.get(v, ()) if c.rank != INF]
        neg = [c for c in occ.get(-v, ()) if c.rank != INF]
        temps = [c for c in list(occ.get(v, ())) + list(occ.get(-v, ())) if c.rank == INF]
        return pos, neg, temps

    def _add_resolvent(self, lits, rank, v: int) -> None:
        if not lits:
            self.on_empty()
            return
        if len(lits) == 1:
            self.on_unit(lits[0])
            return
        c = self.db.add(lits, rank)
        c.origin = v
        self.store.resolvents[v].append(c)
        self.added.append(c)

    def _save_and_remove(self, clauses: Iterable[ClauseRecord], table: List[Saved]) -> None:
        for c in clauses:
            table.append((c.lits, c.rank))
            self._remove(c)

    def _remove(self, c: ClauseRecord) -> None:
        for l in c.lits:
            self.removed_vars.add(var_of(l))
        self.db.remove(c)

    @staticmethod
    def _resolvents(pos: Sequence[Saved], neg: Sequence[Saved], v: int, limit: int):
        out = []
        for p, pr in pos:
            for q, qr in neg:
                r = resolve(p, q, v)
                if r is None:
                    continue
                out.append((r, max(pr, qr)))
                if len(out) > limit:
                    return None
        return out

    # -- operations -------------------------------------------------------
    def try_eliminate(self, v: int, frozen: Set[int] = frozenset()) -> bool:
        store = self.store
        if v in store.eliminated or v in frozen:
            return False
        if v > self.trail.num_vars or self.trail.vals[v] != 0:
            return False
        pos, neg, temps = self._split(v)
        budget = len(pos) + len(neg)
        if budget == 0 or budget > OCC_LIMIT:
            return False
        pos_saved = [(c.lits, c.rank) for c in pos]
        neg_saved = [(c.lits, c.rank) for c in neg]
        resolvents = self._resolvents(pos_saved, neg_saved, v, budget)
        if resolvents is None:
            return False
        store.eliminated.add(v)
        store.order.append(v)
        self._save_and_remove(pos, store.pos[v])
        self._save_and_remove(neg, store.neg[v])
        for c in temps:
            self._remove(c)
        for lits, rank in resolvents:
            self._add_resolvent(lits, rank, v)
        self.eliminations += 1
        return True

    def reintroduce(self, v: int) -> List[ClauseRecord]:
        """Bring back the saved clauses of ``v`` with their stored ranks."""
        store = self.store
        saved = store.saved(v)
        olds = store.resolvents.get(v, [])
        store.drop(v)
        if self.db.num_stashed() == 0:
            # Unmodified resolvents are implied by the restored parents; with
            # nothing stashed they represent nothing and can go.
            for c in olds:
                if c.active and c.origin == v and not self.db.is_reason(c):
                    self._remove(c)
        back = []
        for lits, rank in saved:
            c = self.db.add(lits, rank)
            back.append(c)
            self.added.append(c)
        self.reintroductions += 1
        return back

    def repair_eliminated(self, frozen: Set[int] = frozenset()) -> None:
        """Reintroduce or reeliminate every eliminated variable that reappeared."""
        store = self.store
        occ = self.db.occ
        for v in list(store.order):
            if v not in store.eliminated:
                continue
            assigned = v <= self.trail.num_vars and self.trail.vals[v] != 0
            if not assigned and not occ.get(v) and not occ.get(-v):
                continue
            new_pos, new_neg, temps = self._split(v)
            if assigned or v in frozen:
                self.reintroduce(v)
                continue
            budget = len(new_pos) + len(new_neg)
            new_pos_saved = [(c.lits, c.rank) for c in new_pos]
            new_neg_saved = [(c.lits, c.rank) for c in new_neg]
            extra = []
            if budget:
                first = self._resolvents(new_pos_saved, store.neg[v] + new_neg_saved, v, budget)
                second = None
                if first is not None:
                    second = self._resolvents(store.pos[v], new_neg_saved, v, budget - len(first))
                if first is None or second is None:
                    self.reintroduce(v)
                    continue
                extra = first + second
            self._save_and_remove(new_pos, store.pos[v])
            self._save_and_remove(new_neg, store.neg[v])
            for c in temps:
                self._remove(c)
            for lits, rank in extra:
                self._add_resolvent(lits, rank, v)
            self.reeliminations += 1

    def purge_rank(self, i: int) -> int:
        return self.store.purge_rank(i)
