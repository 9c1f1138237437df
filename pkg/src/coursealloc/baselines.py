"""Centralized comparison mechanisms: HBS draft, RSD, Greedy, Random."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .adcop import stream
from .model import Problem, Solution

log = logging.getLogger(__name__)

ORDER_STREAM = 3
RANDOM_ALLOC_STREAM = 4

# HBS add-drop stops after this many accepted swaps per student.
ADD_DROP_CAP_PER_STUDENT = 10


@dataclass(frozen=True)
class AgentOrder:
    order: tuple[int, ...]
    seed: int | None = None

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        if sorted(order) != list(range(len(order))):
            raise ValueError("order must be a permutation of 0..n-1")
        object.__setattr__(self, "order", order)

    def __len__(self) -> int:
        return len(self.order)

    @classmethod
    def identity(cls, n: int) -> AgentOrder:
        return cls(tuple(range(n)))


def random_order(n: int, seed: int) -> AgentOrder:
    perm = stream(seed, ORDER_STREAM).permutation(n)
    return AgentOrder(tuple(int(i) for i in perm), seed)


def _friend_gain(problem: Problem, student: int, members: list[set[int]]) -> np.ndarray:
    """Per-course friendship credit from friends currently enrolled there."""
    gain = np.zeros(problem.m)
    for j, reward in zip(problem.friends[student], problem.friend_reward[student]):
        for c in members[j]:
            gain[c] += reward * problem.w
    return gain


def _utility(problem: Problem, student: int, bundle: set[int], held: list[set[int]]) -> float:
    reward = problem.course_reward[student]
    value = float(sum(reward[c] for c in bundle))
    for j, rank_reward in zip(problem.friends[student], problem.friend_reward[student]):
        value += rank_reward * problem.w * len(bundle & held[j])
    return value


def hbs(problem: Problem, order: AgentOrder) -> Solution:
    """Serpentine one-course-per-turn draft followed by add-drop passes.

    On each turn a student takes the open course maximizing its own reward
    plus the credit from friends already enrolled in it. Students who cannot
    be served are skipped, so in over-subscribed instances some bundles may
    end up short.
    """
    n, m, b, q = problem.n, problem.m, problem.b, problem.q
    held: list[set[int]] = [set() for _ in range(n)]
    counts = np.zeros(m, dtype=np.int64)
    reward = problem.course_reward

    for r in range(m):
        if all(len(h) >= b for h in held):
            break
        sequence = order.order if r % 2 == 0 else order.order[::-1]
        for i in sequence:
            if len(held[i]) >= b:
                continue
            marginal = reward[i] + _friend_gain(problem, i, held)
            open_courses = [c for c in range(m) if c not in held[i] and counts[c] < q]
            if not open_courses:
                continue
            # ties go to the better-ranked course
            pick = max(open_courses, key=lambda c: (marginal[c], reward[i][c]))
            held[i].add(pick)
            counts[pick] += 1

    cap = ADD_DROP_CAP_PER_STUDENT * n
    swaps = 0
    changed = True
    while changed and swaps < cap:
        changed = False
        for i in sorted(range(n)):
            if swaps >= cap:
                break
            current = _utility(problem, i, held[i], held)
            best, best_gain = None, 1e-9
            if len(held[i]) < b:
                # a short bundle may simply enroll in an open course
                for add in range(m):
                    if add not in held[i] and counts[add] < q:
                        gain = _utility(problem, i, held[i] | {add}, held) - current
                        if gain > best_gain:
                            best, best_gain = (None, add), gain
            for drop in sorted(held[i]) if best is None else ():
                for add in range(m):
                    if add in held[i] or counts[add] >= q:
                        continue
                    trial = (held[i] - {drop}) | {add}
                    gain = _utility(problem, i, trial, held) - current
                    if gain > best_gain:
                        best, best_gain = (drop, add), gain
            if best is not None:
                drop, add = best
                held[i] = (held[i] - {drop}) | {add}
                if drop is not None:
                    counts[drop] -= 1
                counts[add] += 1
                swaps += 1
                changed = True
    if swaps >= cap:
        log.info("HBS add-drop stopped at the swap cap (%d swaps)", cap)
    return tuple(tuple(sorted(h)) for h in held)


def rsd(problem: Problem, order: AgentOrder) -> Solution:
    """Serial dictatorship over whole bundles, friendship-aware.

    Each student in turn takes the bundle with free seats in every course
    that maximizes course plus friendship utility against the students
    already served. Without such a bundle it falls back to the bundles that
    contain every course with a free seat, picking the best of those.
    """
    domain = problem.domain
    n, q = problem.n, problem.q
    counts = np.zeros(problem.m, dtype=np.int64)
    chosen: list[int | None] = [None] * n
    unary = problem.course_reward @ domain.incidence.T
    for i in order.order:
        util = unary[i].astype(np.float64)
        for j, reward in zip(problem.friends[i], problem.friend_reward[i]):
            if chosen[j] is not None:
                util += reward * problem.w * domain.overlap[:, chosen[j]]
        full = (counts >= q).astype(np.int64)
        valid = np.flatnonzero(domain.incidence @ full == 0)
        if not len(valid):
            valid = domain.containing(np.flatnonzero(counts < q))
        v = int(valid[np.argmax(util[valid])])
        chosen[i] = v
        counts += domain.incidence[v]
    return tuple(domain.bundles[v] for v in chosen)


def greedy(problem: Problem) -> Solution:
    return tuple(tuple(sorted(row[: problem.b])) for row in problem.course_rank)


def random_alloc(problem: Problem, seed: int) -> Solution:
    rng = stream(seed, RANDOM_ALLOC_STREAM)
    return tuple(
        tuple(sorted(int(c) for c in rng.choice(problem.m, size=problem.b, replace=False)))
        for _ in range(problem.n)
    )


def feasible(problem: Problem) -> bool:
    return problem.n * problem.b <= problem.m * problem.q
