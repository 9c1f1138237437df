"""Distributed course allocation with asymmetric friendships.

DSA_RC and classical DSA on a synchronous ADCOP engine, four centralized
baselines (HBS draft, RSD, Greedy, Random), evaluation metrics and a
seeded experiment harness.
"""

from .adcop import AnytimeTracker, DomainTable, anytime_update, enumerate_domain, run_synchronous
from .baselines import AgentOrder, greedy, hbs, random_alloc, random_order, rsd
from .metrics import RunReport, gini, illegal_assignments, positional_utilities, report
from .model import (
    Problem,
    build_binary_table,
    build_unary_table,
    course_utility,
    friendship_utility,
    seat_counts,
    toy_problem,
    total_utility,
)
from .search import SearchConfig, dsa_rc_step, dsa_step, min_conflict_max_util, solve

__all__ = [
    "AgentOrder",
    "AnytimeTracker",
    "DomainTable",
    "Problem",
    "RunReport",
    "SearchConfig",
    "anytime_update",
    "build_binary_table",
    "build_unary_table",
    "course_utility",
    "dsa_rc_step",
    "dsa_step",
    "enumerate_domain",
    "friendship_utility",
    "gini",
    "greedy",
    "hbs",
    "illegal_assignments",
    "min_conflict_max_util",
    "positional_utilities",
    "random_alloc",
    "random_order",
    "report",
    "rsd",
    "run_synchronous",
    "seat_counts",
    "solve",
    "toy_problem",
    "total_utility",
]
