"""Small builders shared by the test modules."""
from bisat.checker import Snapshot
from bisat.clausedb import INF, ClauseDatabase
from bisat.core import Trail


def database(entries=(), num_vars=10, keep_bound=6):
    trail = Trail.from_entries(entries) if entries else Trail(num_vars)
    trail.ensure_vars(num_vars)
    return ClauseDatabase(trail, keep_bound=keep_bound), trail


def open_levels(trail, n):
    while trail.decision_level < n:
        trail.new_level()


def snapshot(db, inputs, n, saved=()):
    """Snapshot built straight from a database, for tests without a solver."""
    t = db.trail
    copy = Trail(t.num_vars)
    for l in t.lits:
        open_levels(copy, t.level[abs(l)])
        copy.assign(l)
    open_levels(copy, t.decision_level)
    active = {r: [c.lits for c in g] for r, g in db.groups.items() if g}
    stashed = {k: [c.lits for c in g] for k, g in db.stashed.items() if g}
    return Snapshot(n, copy, [tuple(c) for c in inputs], active, stashed, list(saved), db.audit())


def clause_sets(db):
    """(active by rank, stashed by key) as sets of sorted literal tuples."""
    act = {r: {tuple(sorted(c.lits)) for c in g} for r, g in db.groups.items() if g}
    st = {k: {tuple(sorted(c.lits)) for c in g} for k, g in db.stashed.items() if g}
    return act, st


__all__ = ["INF", "database", "open_levels", "snapshot", "clause_sets"]
