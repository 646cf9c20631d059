"""Clause partition with ranks, stashing and per-literal indexes.

Active clauses live in rank groups: 0 (pervasive), k >= 1 (deputies at k)
and ``INF`` (temporary).  Stashed clauses are inactive and live in groups
keyed by ``(stash_level, restore_level)``.  Only active clauses are watched,
appear in occurrence lists or sit in the work queue.
"""
from __future__ import annotations

import heapq
import itertools
import math
from collections import defaultdict
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple

from .core import Trail, var_of

INF = math.inf


class ReasonProtected(Exception):
    """Raised when an operation would stash or delete a reason clause."""


class ClauseStatus(NamedTuple):
    kind: str  # 'pervasive' | 'deputy' | 'temporary' | 'stashed' | 'deleted'
    level: Optional[float] = None
    restore: Optional[int] = None


class ClauseRecord:
    __slots__ = ("lits", "rank", "stash_level", "active", "deleted", "w0", "w1",
                 "activity", "cid", "origin", "queued", "skip_round")

    def __init__(self, lits: Tuple[int, ...], rank, cid: int):
        self.lits = lits
        self.rank = rank
        self.stash_level = 0
        self.active = False
        self.deleted = False
        self.w0 = 0
        self.w1 = 0
        self.activity = 0.0
        self.cid = cid
        self.origin = 0  # variable whose elimination produced this clause
        self.queued = False
        self.skip_round = False

    @property
    def status(self) -> ClauseStatus:
        if self.deleted:
            return ClauseStatus("deleted")
        if not self.active:
            return ClauseStatus("stashed", self.stash_level, self.rank)
        if self.rank == 0:
            return ClauseStatus("pervasive", 0)
        if self.rank == INF:
            return ClauseStatus("temporary", INF)
        return ClauseStatus("deputy", self.rank)

    def __len__(self):
        return len(self.lits)

    def __iter__(self):
        return iter(self.lits)

    def __repr__(self):
        st = self.status
        tag = st.kind if st.level is None else f"{st.kind}@{st.level}"
        if st.kind == "stashed":
            tag += f"->{st.restore}"
        return f"<{' '.join(map(str, self.lits))} {tag}>"


class ClauseDatabase:
    """Clause groups, occurrence lists, watches and the sumption work queue.

    The database reads the shared ``trail`` to pick watches and to enforce
    reason protection; it never changes the trail.
    """

    def __init__(self, trail: Trail, keep_bound: int = 6):
        self.trail = trail
        self.keep_bound = keep_bound
        self.groups: Dict[float, Dict[ClauseRecord, None]] = defaultdict(dict)
        self.stashed: Dict[Tuple[int, float], Dict[ClauseRecord, None]] = defaultdict(dict)
        self.occ: Dict[int, Dict[ClauseRecord, None]] = defaultdict(dict)
        self.watches: List[List[ClauseRecord]] = [[]]
        self.num_vars = 0
        self.queue: List[tuple] = []
        self.next_id = 0
        self._seq = itertools.count()
        self.max_level_used = 0
        self.track_fresh = True
        # clauses activated since the owner last drained these lists
        self.activated: List[ClauseRecord] = []
        self.fresh: List[ClauseRecord] = []
        self.ensure_vars(trail.num_vars)

    # -- sizing -----------------------------------------------------------
    def ensure_vars(self, n: int) -> None:
        if n <= self.num_vars:
            return
        cap = (len(self.watches) - 1) // 2
        if n > cap:
            new_cap = max(n, 2 * cap)
            old = self.watches
            w = [[] for _ in range(2 * new_cap + 1)]
            for v in range(1, self.num_vars + 1):
                w[v] = old[v]
                w[-v] = old[-v]
            self.watches = w
        self.num_vars = n
        self.trail.ensure_vars(n)

    # -- queries ----------------------------------------------------------
    def rank(self, c: ClauseRecord):
        if not c.active:
            raise ValueError(f"rank of an inactive clause {c!r}")
        return c.rank

    def is_reason(self, c: ClauseRecord) -> bool:
        t = self.trail
        vals, reason = t.vals, t.reason
        for l in c.lits:
            if vals[l] == 1 and reason[l if l > 0 else -l] is c:
                return True
        return False

    def active_clauses(self) -> Iterable[ClauseRecord]:
        for r in sorted(self.groups):
            yield from list(self.groups[r])

    def stashed_clauses(self) -> Iterable[ClauseRecord]:
        for key in sorted(self.stashed):
            yield from list(self.stashed[key])

    def group(self, rank) -> List[ClauseRecord]:
        return list(self.groups.get(rank, ()))

    def stash_group(self, i: int, q) -> List[ClauseRecord]:
        return list(self.stashed.get((i, q), ()))

    def num_active(self) -> int:
        return sum(len(g) for g in self.groups.values())

    def num_non_temporary(self) -> int:
        return sum(len(g) for r, g in self.groups.items() if r != INF)

    def num_stashed(self) -> int:
        return sum(len(g) for g in self.stashed.values())

    def max_bi_level(self) -> int:
        top = 0
        for r, g in self.groups.items():
            if g and r != INF and r > top:
                top = r
        for (i, _), g in self.stashed.items():
            if g and i > top:
                top = i
        return int(top)

    def effective_size(self, c: ClauseRecord) -> int:
        vals = self.trail.vals
        return sum(1 for l in c.lits if vals[l] != -1)

    # -- watches ----------------------------------------------------------
    def _watch_key(self, l: int):
        t = self.trail
        val = t.vals[l]
        if val == 1:
            return (0, t.level[var_of(l)])
        if val == 0:
            return (1, 0)
        return (2, -t.level[var_of(l)])

    def _attach(self, c: ClauseRecord) -> None:
        lits = c.lits
        if len(lits) < 2:
            raise ValueError("unit and empty clauses are kept on the trail, not in the database")
        if len(lits) == 2:
            a, b = lits
            if self._watch_key(b) < self._watch_key(a):
                a, b = b, a
        else:
            a, b = sorted(lits, key=self._watch_key)[:2]
        c.w0, c.w1 = a, b
        self.watches[a].append(c)
        self.watches[b].append(c)

    def _detach(self, c: ClauseRecord) -> None:
        for l in (c.w0, c.w1):
            ws = self.watches[l]
            for idx in range(len(ws)):
                if ws[idx] is c:
                    del ws[idx]
                    break
        c.w0 = c.w1 = 0

    # -- activation plumbing ----------------------------------------------
    def _activate(self, c: ClauseRecord, rank, notify: bool) -> None:
        c.rank = rank
        c.active = True
        self.groups[rank][c] = None
        occ = self.occ
        for l in c.lits:
            occ[l][c] = None
        self._attach(c)
        if rank != INF and rank > self.max_level_used:
            self.max_level_used = int(rank)
        if self.track_fresh:
            self.fresh.append(c)
        if notify:
            self.activated.append(c)

    def _deactivate(self, c: ClauseRecord) -> None:
        self.groups[c.rank].pop(c, None)
        occ = self.occ
        for l in c.lits:
            occ[l].pop(c, None)
        self._detach(c)
        c.active = False
        c.queued = False

    def add(self, lits: Tuple[int, ...], rank=0, notify: bool = True) -> ClauseRecord:
        """Register a new active clause in group ``rank``.

        ``notify`` queues it for the owner's under-trail check (learned
        clauses are handled by the caller and skip it).
        """
        if lits:
            top = max(var_of(l) for l in lits)
            if top > self.num_vars:
                self.ensure_vars(top)
        c = ClauseRecord(tuple(lits), rank, self.next_id)
        self.next_id += 1
        self._activate(c, rank, notify)
        return c

    def replace_literals(self, c: ClauseRecord, lits: Tuple[int, ...]) -> None:
        """Strengthen an active clause in place (same record, same rank)."""
        rank = c.rank
        self._deactivate(c)
        c.lits = tuple(lits)
        c.origin = 0
        self._activate(c, rank, notify=True)

    # -- group moves ------------------------------------------------------
    def promote(self, c: ClauseRecord, k: int) -> None:
        if not c.active:
            raise ValueError(f"cannot promote inactive clause {c!r}")
        if not k < c.rank:
            raise ValueError(f"promotion must lower the rank ({c.rank} -> {k})")
        del self.groups[c.rank][c]
        c.rank = k
        self.groups[k][c] = None
        if k > self.max_level_used:
            self.max_level_used = k

    def stash(self, c: ClauseRecord, i: int, q) -> None:
        if not c.active:
            raise ValueError(f"cannot stash inactive clause {c!r}")
        if q != c.rank:
            raise ValueError(f"restore level {q} must equal the current rank {c.rank}")
        if not (q < i <= self.trail.decision_level):
            raise ValueError(f"stash needs restore < stash level <= current level (q={q}, i={i})")
        if self.is_reason(c):
            raise ReasonProtected(repr(c))
        self._deactivate(c)
        c.stash_level = i
        self.stashed[(i, q)][c] = None
        if i > self.max_level_used:
            self.max_level_used = i

    def delete_or_demote(self, c: ClauseRecord, demote: bool) -> None:
        if not c.active:
            raise ValueError(f"cannot delete inactive clause {c!r}")
        if demote:
            if c.rank != INF:
                del self.groups[c.rank][c]
                c.rank = INF
                self.groups[INF][c] = None
            return
        if self.is_reason(c):
            raise ReasonProtected(repr(c))
        self._deactivate(c)
        c.deleted = True

    def remove(self, c: ClauseRecord) -> None:
        """Delete an active clause regardless of its group (elimination, GC)."""
        self.delete_or_demote(c, demote=False)

    def restore_level(self, i: int) -> List[ClauseRecord]:
        """Undo level ``i``: retire ``D_i`` and reactivate every ``S_i^q`` into ``D_q``."""
        if self.trail.decision_level >= i:
            raise ValueError(f"restore_level({i}) requires backtracking below {i}")
        for c in list(self.groups.get(i, ())):
            self.delete_or_demote(c, demote=self.is_reason(c) or len(c.lits) <= self.keep_bound)
        restored = []
        for key in sorted(k for k in self.stashed if k[0] == i):
            group = self.stashed.pop(key)
            q = key[1]
            for c in group:
                c.stash_level = 0
                self._activate(c, q, notify=True)
                restored.append(c)
        return restored

    # -- work queue -------------------------------------------------------
    def push(self, c: ClauseRecord) -> None:
        if not c.active or c.queued:
            return
        c.queued = True
        heapq.heappush(self.queue, (self.effective_size(c), c.cid, next(self._seq), c))

    def clear_queue(self) -> None:
        for entry in self.queue:
            entry[-1].queued = False
        self.queue = []

    def pop_smallest_active(self) -> Optional[ClauseRecord]:
        q = self.queue
        while q:
            size, cid, _, c = heapq.heappop(q)
            if not c.active or not c.queued:
                continue
            now = self.effective_size(c)
            if now > size:
                heapq.heappush(q, (now, cid, next(self._seq), c))
                continue
            c.queued = False
            return c
        return None

    def requeue_all(self) -> None:
        """Recompute every queued priority against the current trail."""
        items = {e[-1]: None for e in self.queue if e[-1].active and e[-1].queued}
        self.queue = [(self.effective_size(c), c.cid, next(self._seq), c) for c in items]
        heapq.heapify(self.queue)

    def take_activated(self) -> List[ClauseRecord]:
        out, self.activated = self.activated, []
        return out

    def take_fresh(self) -> List[ClauseRecord]:
        out, self.fresh = self.fresh, []
        return out

    # -- audit ------------------------------------------------------------
    def audit(self) -> List[str]:
        """Cross-check groups, occurrence lists, watches and queue; return problems."""
        problems = []
        active = set()
        for r, g in self.groups.items():
            for c in g:
                if not c.active or c.deleted:
                    problems.append(f"inactive clause {c!r} in active group {r}")
                if c.rank != r:
                    problems.append(f"clause {c!r} in group {r} has rank {c.rank}")
                if c in active:
                    problems.append(f"clause {c!r} in two active groups")
                active.add(c)
        stashed = set()
        for (i, q), g in self.stashed.items():
            if not q < i:
                problems.append(f"stash group ({i},{q}) violates q < i")
            for c in g:
                if c.active or c.deleted:
                    problems.append(f"active/deleted clause {c!r} in stash group ({i},{q})")
                if c.stash_level != i or c.rank != q:
                    problems.append(f"clause {c!r} stash fields disagree with group ({i},{q})")
                if c in stashed or c in active:
                    problems.append(f"clause {c!r} in two groups")
                stashed.add(c)
        for l, cs in self.occ.items():
            for c in cs:
                if c not in active:
                    problems.append(f"occ[{l}] holds non-active {c!r}")
                elif l not in c.lits:
                    problems.append(f"occ[{l}] holds {c!r} lacking the literal")
        for c in active:
            for l in c.lits:
                if c not in self.occ.get(l, ()):
                    problems.append(f"{c!r} missing from occ[{l}]")
            if c.w0 == c.w1 or c.w0 not in c.lits or c.w1 not in c.lits:
                problems.append(f"{c!r} has bad watches {c.w0},{c.w1}")
            else:
                for l in (c.w0, c.w1):
                    if sum(1 for x in self.watches[l] if x is c) != 1:
                        problems.append(f"{c!r} not watched exactly once on {l}")
        for v in range(1, self.num_vars + 1):
            for l in (v, -v):
                for c in self.watches[l]:
                    if c not in active:
                        problems.append(f"watch list {l} holds non-active {c!r}")
                    elif l not in (c.w0, c.w1):
                        problems.append(f"watch list {l} holds {c!r} not watching it")
        for entry in self.queue:
            c = entry[-1]
            if c.queued and c not in active:
                problems.append(f"queue holds non-active {c!r}")
        return problems
