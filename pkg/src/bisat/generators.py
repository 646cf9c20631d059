"""Instance generators: random incremental problems and BMC-style unrollings."""
from __future__ import annotations

import random
from typing import List, Optional

from .core import make_clause
from .formats import AddClause, IncrementalProblem, Query


def random_incremental(rng: random.Random, max_vars: int = 25, max_clauses: int = 120,
                       max_queries: int = 5, max_assumptions: int = 5) -> IncrementalProblem:
    """Random clauses split into segments, each followed by one query."""
    n = rng.randint(3, max_vars)
    m = rng.randint(1, min(max_clauses, int(n * rng.uniform(1.5, 5.0)) + 1))
    q = rng.randint(1, max_queries)
    cuts = sorted(rng.randint(0, m) for _ in range(q - 1)) + [m]
    events = []
    made = 0
    for cut in cuts:
        while made < cut:
            k = rng.choices((1, 2, 3, 4), weights=(1, 6, 12, 3))[0]
            vs = rng.sample(range(1, n + 1), min(k, n))
            c = make_clause(v if rng.random() < 0.5 else -v for v in vs)
            made += 1
            if c is not None:
                events.append(AddClause(c))
        a = rng.randint(0, min(max_assumptions, n))
        vs = rng.sample(range(1, n + 1), a)
        events.append(Query(tuple(v if rng.random() < 0.5 else -v for v in vs)))
    return IncrementalProblem(n, events)


class _Builder:
    def __init__(self):
        self.n = 0
        self.events = []

    def var(self) -> int:
        self.n += 1
        return self.n

    def clause(self, *lits) -> None:
        c = make_clause(lits)
        if c is not None:
            self.events.append(AddClause(c))

    def query(self, *lits) -> None:
        self.events.append(Query(tuple(lits)))

    def xor(self, a: int, b: int) -> int:
        y = self.var()
        self.clause(-y, a, b)
        self.clause(-y, -a, -b)
        self.clause(y, -a, b)
        self.clause(y, a, -b)
        return y

    def and_(self, a: int, b: int) -> int:
        y = self.var()
        self.clause(-y, a)
        self.clause(-y, b)
        self.clause(y, -a, -b)
        return y

    def mux(self, s: int, hi: int, lo: int) -> int:
        y = self.var()
        self.clause(-s, -hi, y)
        self.clause(-s, hi, -y)
        self.clause(s, -lo, y)
        self.clause(s, lo, -y)
        return y

    def problem(self) -> IncrementalProblem:
        return IncrementalProblem(self.n, self.events)


def counter_bmc(width: int, steps: int, target: Optional[int] = None, seed: int = 0,
                input_assumptions: int = 2) -> IncrementalProblem:
    """Enabled binary counter unrolled one step per query.

    Query ``t`` asks whether the counter equals ``target`` after ``t`` steps.
    Each query also assumes a few random enable values, so inprocessing under
    assumptions has something to simplify.
    """
    rng = random.Random(seed)
    if target is None:
        target = rng.randint(steps // 2, steps + 4)
    b = _Builder()
    x = [b.var() for _ in range(width)]
    for v in x:
        b.clause(-v)
    enables = []
    for t in range(1, steps + 1):
        e = b.var()
        enables.append(e)
        carry = e
        nxt = []
        for i in range(width):
            nxt.append(b.xor(x[i], carry))
            if i + 1 < width:
                carry = b.and_(x[i], carry)
        # a second register that copies the first one when enabled
        shadow = [b.mux(e, nxt[i], x[i]) for i in range(width)]
        for i in range(width):
            b.clause(-shadow[i], nxt[i], x[i])
        x = nxt
        act = b.var()
        for i in range(width):
            bit = (target >> i) & 1
            b.clause(-act, x[i] if bit else -x[i])
        picks = rng.sample(enables, min(input_assumptions, len(enables)))
        b.query(act, *[p if rng.random() < 0.8 else -p for p in picks])
    return b.problem()


def token_ring_bmc(positions: int, steps: int, seed: int = 0,
                   input_assumptions: int = 2) -> IncrementalProblem:
    """One token moving around a ring; query ``t`` asks for it at a far position."""
    rng = random.Random(seed)
    b = _Builder()
    x = [b.var() for _ in range(positions)]
    b.clause(x[0])
    for v in x[1:]:
        b.clause(-v)
    goal = rng.randint(steps // 2, positions - 1)
    moves = []
    for t in range(1, steps + 1):
        e = b.var()
        moves.append(e)
        nxt = [b.mux(e, x[i - 1], x[i]) for i in range(positions)]
        for i in range(positions):
            for j in range(i + 1, min(positions, i + 3)):
                b.clause(-nxt[i], -nxt[j])
        x = nxt
        act = b.var()
        b.clause(-act, x[goal])
        picks = rng.sample(moves, min(input_assumptions, len(moves)))
        b.query(act, *[p if rng.random() < 0.8 else -p for p in picks])
    return b.problem()


def pigeonhole_incremental(holes: int) -> IncrementalProblem:
    """Pigeons are switched on one query at a time; the last query is unsatisfiable."""
    b = _Builder()
    pigeons = holes + 1
    p = [[b.var() for _ in range(holes)] for _ in range(pigeons)]
    on = [b.var() for _ in range(pigeons)]
    for i in range(pigeons):
        b.clause(-on[i], *p[i])
    for h in range(holes):
        for i in range(pigeons):
            for j in range(i + 1, pigeons):
                b.clause(-p[i][h], -p[j][h])
    for k in range(1, pigeons + 1):
        b.query(*on[:k])
    return b.problem()


def scaled_suite(count: int = 20, seed: int = 0, steps: int = 30) -> List[IncrementalProblem]:
    """Mixed BMC-style instances of roughly 2,000 variables and ``steps`` queries each."""
    rng = random.Random(seed)
    out = []
    for k in range(count):
        s = rng.randrange(1 << 30)
        if k % 2 == 0:
            out.append(counter_bmc(width=20, steps=steps, seed=s))
        else:
            out.append(token_ring_bmc(positions=64, steps=steps, seed=s))
    return out
