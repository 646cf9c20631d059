"""Incremental CDCL SAT solver with backtrackable inprocessing."""
from .bve import EliminationStore, Eliminator
from .checker import check_snapshot, check_solver, entails_at_level, take_snapshot
from .clausedb import INF, ClauseDatabase, ClauseRecord, ClauseStatus, ReasonProtected
from .core import (Trail, d_subsumes, make_clause, min_satisfaction_level,
                   min_selfsumption_level, min_subsumption_level, resolve, restrict_clause)
from .formats import (IncrementalProblem, ParseError, parse_dimacs, parse_icnf, to_dimacs,
                      to_icnf, write_stats_csv)
from .inprocess import Inprocessor, SumptionFinding
from .solver import QueryStats, Solver, Verdict
from .strategies import Strategy, StrategyState

__version__ = "0.1.0"

__all__ = [
    "ClauseDatabase", "ClauseRecord", "ClauseStatus", "EliminationStore", "Eliminator", "INF",
    "IncrementalProblem", "Inprocessor", "ParseError", "QueryStats", "ReasonProtected", "Solver",
    "Strategy", "StrategyState", "SumptionFinding", "Trail", "Verdict", "check_snapshot",
    "check_solver", "d_subsumes", "entails_at_level", "make_clause", "min_satisfaction_level",
    "min_selfsumption_level", "min_subsumption_level", "parse_dimacs", "parse_icnf", "resolve",
    "restrict_clause", "take_snapshot", "to_dimacs", "to_icnf", "write_stats_csv",
]
