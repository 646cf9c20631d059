"""Literals, clauses, trails and the level-parameterized clause predicates.

Literals are non-zero DIMACS integers: ``v`` is the positive literal of
variable ``v`` and ``-v`` its negation.  Clauses are tuples of literals in
canonical order (variable index, negative before positive).

Every level query returns ``Optional[int]``: ``None`` means the property
holds at no level up to the trail's current level, an int ``d`` means it holds
at ``d`` and at no lower level.
"""
from __future__ import annotations

from typing import Iterable, List, Optional, Sequence, Tuple

Literal = int
Clause = Tuple[int, ...]
LevelOutcome = Optional[int]

NOT_AT_ANY_LEVEL: LevelOutcome = None


def lit(variable: int, polarity: bool = True) -> Literal:
    if variable < 1:
        raise ValueError(f"variable index must be >= 1, got {variable}")
    return variable if polarity else -variable


def var_of(literal: Literal) -> int:
    return literal if literal > 0 else -literal


def polarity(literal: Literal) -> bool:
    return literal > 0


def lit_key(literal: Literal) -> Tuple[int, bool]:
    return (var_of(literal), literal > 0)


class TautologyError(ValueError):
    pass


def make_clause(literals: Iterable[Literal], allow_tautology: bool = False) -> Optional[Clause]:
    """Canonicalize ``literals``: drop duplicates and sort.

    Returns ``None`` for tautologies unless ``allow_tautology`` is set.
    """
    lits = set()
    for l in literals:
        if l == 0:
            raise ValueError("0 is not a literal")
        lits.add(int(l))
    if not allow_tautology:
        for l in lits:
            if -l in lits:
                return None
    return tuple(sorted(lits, key=lit_key))


def is_tautology(literals: Iterable[Literal]) -> bool:
    s = set(literals)
    return any(-l in s for l in s)


class Trail:
    """Ordered, level-annotated assignment.

    Values are indexed by literal through Python's negative indexing:
    ``vals[l]`` is 1 when ``l`` is true, -1 when false and 0 when unassigned.
    The solver uses this class directly as its assignment.
    """

    def __init__(self, num_vars: int = 0):
        self.num_vars = 0
        self.vals: List[int] = [0]
        self.level: List[int] = [0]
        self.reason: list = [None]
        self.lits: List[Literal] = []
        self.lim: List[int] = []
        self.decision_flags: List[bool] = []
        self.ensure_vars(num_vars)

    @classmethod
    def from_entries(cls, entries: Sequence[Tuple[Literal, int]]) -> "Trail":
        """Build a trail from ``(literal, level)`` pairs.

        The first literal of every level above 0 is its decision; empty
        levels in between are opened without a decision.
        """
        t = cls(max((var_of(l) for l, _ in entries), default=0))
        for l, d in entries:
            if d < t.decision_level:
                raise ValueError("levels must be non-decreasing along the trail")
            opened = False
            while t.decision_level < d:
                t.new_level()
                opened = True
            t.assign(l, None, decision=opened and d > 0)
        return t

    def ensure_vars(self, n: int) -> None:
        if n <= self.num_vars:
            return
        old_n = self.num_vars
        cap = (len(self.vals) - 1) // 2
        if n > cap:
            # literal-indexed storage: vals[-v] lands in the upper half
            new_cap = max(n, 2 * cap)
            vals = [0] * (2 * new_cap + 1)
            for v in range(1, old_n + 1):
                vals[v] = self.vals[v]
                vals[-v] = self.vals[-v]
            self.vals = vals
        self.level.extend([0] * (n - old_n))
        self.reason.extend([None] * (n - old_n))
        self.num_vars = n

    @property
    def decision_level(self) -> int:
        return len(self.lim)

    current_level = decision_level

    def new_level(self) -> None:
        self.lim.append(len(self.lits))

    def assign(self, literal: Literal, reason=None, decision: bool = False) -> None:
        v = var_of(literal)
        if v > self.num_vars:
            self.ensure_vars(v)
        if self.vals[literal] != 0:
            raise ValueError(f"variable {v} is already assigned")
        self.vals[literal] = 1
        self.vals[-literal] = -1
        self.level[v] = len(self.lim)
        self.reason[v] = reason
        self.lits.append(literal)
        self.decision_flags.append(decision)

    def backtrack_to(self, d: int) -> List[Literal]:
        """Unassign everything above level ``d`` and return the removed literals."""
        if d >= len(self.lim):
            return []
        start = self.lim[d]
        removed = self.lits[start:]
        vals = self.vals
        for l in removed:
            vals[l] = 0
            vals[-l] = 0
            self.reason[l if l > 0 else -l] = None
        del self.lits[start:]
        del self.decision_flags[start:]
        del self.lim[d:]
        return removed

    def value(self, literal: Literal) -> int:
        if var_of(literal) > self.num_vars:
            return 0
        return self.vals[literal]

    def level_of(self, variable: int) -> Optional[int]:
        if variable > self.num_vars or self.vals[variable] == 0:
            return None
        return self.level[variable]

    def false_level(self, literal: Literal) -> Optional[int]:
        """Level at which ``literal`` became false, or None if it is not false."""
        v = var_of(literal)
        if v > self.num_vars or self.vals[literal] != -1:
            return None
        return self.level[v]

    def true_level(self, literal: Literal) -> Optional[int]:
        v = var_of(literal)
        if v > self.num_vars or self.vals[literal] != 1:
            return None
        return self.level[v]

    def entries(self) -> List[Tuple[Literal, int, bool]]:
        return [(l, self.level[var_of(l)], dec)
                for l, dec in zip(self.lits, self.decision_flags)]

    def prefix(self, d: int) -> List[Literal]:
        """Literals of the restriction of the trail to levels <= d."""
        if d >= len(self.lim):
            return list(self.lits)
        return self.lits[: self.lim[d]]

    def __len__(self) -> int:
        return len(self.lits)

    def __repr__(self) -> str:
        body = ", ".join(f"{l}@{d}" for l, d, _ in self.entries())
        return f"Trail<{body}>"


def restrict_clause(alpha: Iterable[Literal], d: int, tau: Trail) -> Clause:
    """Drop the literals of ``alpha`` falsified on the trail up to level ``d``."""
    out = []
    for l in alpha:
        fl = tau.false_level(l)
        if fl is None or fl > d:
            out.append(l)
    return tuple(out)


def d_subsumes(alpha: Iterable[Literal], beta: Iterable[Literal], d: int, tau: Trail) -> bool:
    return set(restrict_clause(alpha, d, tau)) <= set(restrict_clause(beta, d, tau))


def min_subsumption_level(alpha: Sequence[Literal], beta: Iterable[Literal], tau: Trail) -> LevelOutcome:
    # Each literal of alpha missing from beta must be falsified; the answer is
    # the latest such falsification.
    bset = beta if isinstance(beta, (set, frozenset)) else set(beta)
    k = 0
    for l in alpha:
        if l in bset:
            continue
        fl = tau.false_level(l)
        if fl is None:
            return None
        if fl > k:
            k = fl
    return k


def resolve(alpha: Sequence[Literal], beta: Sequence[Literal], x: int) -> Optional[Clause]:
    """Resolvent of ``alpha`` (containing ``x``) and ``beta`` (containing ``-x``).

    ``x`` may be given as a variable or as the literal occurring in alpha.
    Returns None when the resolvent is tautological.
    """
    if x not in alpha:
        x = -x
    if x not in alpha or -x not in beta:
        raise ValueError(f"clauses are not resolvable on {var_of(x)}")
    out = set(l for l in alpha if l != x)
    for l in beta:
        if l == -x:
            continue
        if -l in out:
            return None
        out.add(l)
    return tuple(sorted(out, key=lit_key))


def min_selfsumption_level(alpha: Sequence[Literal], beta: Sequence[Literal], x: int,
                           tau: Trail) -> LevelOutcome:
    if x not in alpha:
        x = -x
    if x not in alpha or -x not in beta:
        raise ValueError(f"clauses are not resolvable on {var_of(x)}")
    bset = set(beta)
    k = 0
    for l in alpha:
        if l == x or l in bset:
            continue
        if -l in bset:
            return None  # tautological resolvent
        fl = tau.false_level(l)
        if fl is None:
            return None
        if fl > k:
            k = fl
    return k


def min_satisfaction_level(alpha: Iterable[Literal], tau: Trail) -> LevelOutcome:
    best = None
    for l in alpha:
        tl = tau.true_level(l)
        if tl is not None and (best is None or tl < best):
            best = tl
    return best


def evaluate(alpha: Iterable[Literal], assignment) -> bool:
    """Truth of a clause under a total assignment mapping variable -> bool."""
    for l in alpha:
        if assignment[var_of(l)] == (l > 0):
            return True
    return False
