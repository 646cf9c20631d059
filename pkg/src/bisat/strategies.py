"""When to inprocess during a query: VANILLA, BASE, AL, COMB and DYN."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

DYN_CONFLICT_LIMIT = 10_000
AL_BELOW = 200
COMB_FROM = 3000


class Strategy(enum.Enum):
    VANILLA = "vanilla"
    BASE = "base"
    AL = "al"
    COMB = "comb"
    DYN = "dyn"

    @classmethod
    def parse(cls, name) -> "Strategy":
        if isinstance(name, Strategy):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValueError(f"unknown strategy {name!r}") from None


class Metric(enum.Enum):
    SELFSUMPTION = "selfsumption"
    RESTORATION = "restoration"


def choose(m: float) -> Strategy:
    if m < AL_BELOW:
        return Strategy.AL
    if m < COMB_FROM:
        return Strategy.BASE
    return Strategy.COMB


@dataclass
class StrategyState:
    configured: Strategy = Strategy.DYN
    resolved: Optional[Strategy] = None
    metric: Metric = Metric.SELFSUMPTION
    conflicts_seen: int = 0
    selfsumption_count: int = 0
    inprocess_invocations: int = 0
    restoration_count: int = 0
    metric_value: Optional[float] = None

    def __post_init__(self):
        self.configured = Strategy.parse(self.configured)
        if self.configured is not Strategy.DYN:
            self.resolved = self.configured

    @property
    def active(self) -> Strategy:
        """Strategy in force right now (unresolved DYN behaves like AL)."""
        return self.resolved if self.resolved is not None else Strategy.AL

    @property
    def label(self) -> str:
        if self.configured is Strategy.DYN:
            return "DYN→" + self.active.name
        return self.configured.name

    def inprocess_at_zero(self) -> bool:
        return self.active in (Strategy.BASE, Strategy.COMB)

    def inprocess_after_assumptions(self) -> bool:
        return self.active in (Strategy.AL, Strategy.COMB)

    def freeze_assumptions(self) -> bool:
        return self.active in (Strategy.BASE, Strategy.COMB)

    def on_query_start(self, assumptions=()) -> dict:
        """Return the inprocessing plan for a query."""
        return {
            "level_zero": self.inprocess_at_zero(),
            "after_assumptions": self.inprocess_after_assumptions(),
            "freeze": set(abs(l) for l in assumptions) if self.freeze_assumptions() else set(),
        }

    def compute_metric(self) -> float:
        if self.metric is Metric.RESTORATION:
            num, den = self.restoration_count, self.conflicts_seen
        else:
            num, den = self.selfsumption_count, self.inprocess_invocations
        return num / den if den else 0.0

    def dyn_resolve(self) -> Strategy:
        if self.resolved is not None:
            return self.resolved
        self.metric_value = self.compute_metric()
        self.resolved = choose(self.metric_value)
        return self.resolved

    def on_conflict_analyzed(self) -> bool:
        """Count a conflict; returns True when DYN resolved on this conflict."""
        self.conflicts_seen += 1
        if (self.configured is Strategy.DYN and self.resolved is None
                and self.conflicts_seen >= DYN_CONFLICT_LIMIT):
            self.dyn_resolve()
            return True
        return False
