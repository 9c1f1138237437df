"""Per-run evaluation: utilities, illegal assignments, order fairness, Gini."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field

import numpy as np

from .baselines import AgentOrder
from .model import Problem, Solution, seat_counts, student_utilities


def illegal_assignments(solution: Solution, q: int, m: int | None = None, b: int | None = None) -> int:
    """Summed seat overflow across courses, plus missing seats of short bundles."""
    if m is None:
        m = 1 + max((max(bundle) for bundle in solution if bundle), default=-1)
    counts = seat_counts(solution, m)
    illegal = int(np.maximum(counts - q, 0).sum())
    if b is not None:
        illegal += sum(max(0, b - len(bundle)) for bundle in solution)
    return illegal


def gini(utilities: Sequence[float]) -> float:
    """Mean-absolute-difference Gini coefficient; ``nan`` when every utility is 0."""
    u = np.asarray(utilities, dtype=np.float64)
    if u.size == 0 or not u.any():
        return math.nan
    if (u < 0).any():
        raise ValueError("Gini needs non-negative utilities")
    pair_diffs = np.abs(u[:, None] - u[None, :]).sum()
    return float(pair_diffs / (2.0 * u.size * u.sum()))


def positional_utilities(utilities: Sequence[float], order: AgentOrder) -> tuple[float, float, float]:
    n = len(order)
    if n < 1:
        raise ValueError("positional utilities need at least one student")
    first, middle, last = order.order[0], order.order[n // 2], order.order[-1]
    return float(utilities[first]), float(utilities[middle]), float(utilities[last])


@dataclass(frozen=True)
class RunReport:
    algorithm: str
    seed: int
    n: int
    m: int
    b: int
    q: int
    f: int
    w: float
    rounds: int
    alpha: float
    total_utility: float
    course_utility: float
    friendship_utility: float
    illegal: int
    first: float
    middle: float
    last: float
    gini: float
    rep: int = 0
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def gini_defined(self) -> bool:
        return not math.isnan(self.gini)

    def as_row(self) -> dict:
        row = asdict(self)
        row.pop("extra")
        return row


def report(
    problem: Problem,
    solution: Solution,
    order: AgentOrder,
    *,
    algorithm: str,
    seed: int,
    rounds: int = 0,
    alpha: float = 0.0,
    rep: int = 0,
    **extra,
) -> RunReport:
    course, friend = student_utilities(problem, solution)
    per_student = course + friend
    first, middle, last = positional_utilities(per_student, order)
    course_total = float(course.sum())
    friend_total = float(friend.sum())
    return RunReport(
        algorithm=algorithm,
        seed=seed,
        n=problem.n,
        m=problem.m,
        b=problem.b,
        q=problem.q,
        f=problem.f,
        w=problem.w,
        rounds=rounds,
        alpha=alpha,
        total_utility=course_total + friend_total,
        course_utility=course_total,
        friendship_utility=friend_total,
        illegal=illegal_assignments(solution, problem.q, problem.m, problem.b),
        first=first,
        middle=middle,
        last=last,
        gini=gini(per_student),
        rep=rep,
        extra=dict(extra),
    )
