"""Course allocation with asymmetric, ranked friendships."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .adcop import Bundle, DomainTable, enumerate_domain, make_bundle

Solution = tuple[Bundle, ...]


class InvalidProblem(ValueError):
    pass


class InvalidRelation(ValueError):
    pass


@dataclass(frozen=True)
class Problem:
    """One allocation instance.

    ``course_rank[i]`` lists student ``i``'s courses from most to least
    preferred. ``friends[i]`` lists the students ``i`` wants to study with,
    best friend first. ``friend_ranks[i][k]`` is the 1-based rank of
    ``friends[i][k]``; it defaults to the list position, but explicit ranks
    may skip positions (a student naming only a second and third friend).
    A friend of rank ``k`` is worth ``(f - k + 1) * w`` per shared course.
    """

    n: int
    m: int
    b: int
    q: int
    course_rank: tuple[tuple[int, ...], ...]
    friends: tuple[tuple[int, ...], ...]
    f: int = 3
    w: float = 2.0
    friend_ranks: tuple[tuple[int, ...], ...] | None = field(default=None)
    name: str = ""

    def __post_init__(self):
        rank = tuple(tuple(int(c) for c in row) for row in self.course_rank)
        friends = tuple(tuple(int(j) for j in row) for row in self.friends)
        object.__setattr__(self, "course_rank", rank)
        object.__setattr__(self, "friends", friends)
        if self.friend_ranks is None:
            ranks = tuple(tuple(range(1, len(row) + 1)) for row in friends)
        else:
            ranks = tuple(tuple(int(k) for k in row) for row in self.friend_ranks)
        object.__setattr__(self, "friend_ranks", ranks)
        object.__setattr__(self, "w", float(self.w))
        self._validate()

    def _validate(self):
        n, m = self.n, self.m
        if n < 0 or m < 1:
            raise InvalidProblem(f"need n >= 0 and m >= 1, got n={n}, m={m}")
        if not 0 <= self.b <= m:
            raise InvalidProblem(f"bundle size b={self.b} must satisfy 0 <= b <= m={m}")
        if self.q < 1:
            raise InvalidProblem(f"capacity q={self.q} must be >= 1")
        if self.f < 0:
            raise InvalidProblem(f"friend count f={self.f} must be >= 0")
        if self.w < 0:
            raise InvalidProblem(f"friendship weight w={self.w} must be >= 0")
        if len(self.course_rank) != n:
            raise InvalidProblem(f"course_rank has {len(self.course_rank)} rows, expected {n}")
        if len(self.friends) != n or len(self.friend_ranks) != n:
            raise InvalidProblem(f"friends/friend_ranks must have {n} rows")
        for i, row in enumerate(self.course_rank):
            if sorted(row) != list(range(m)):
                raise InvalidProblem(f"course_rank[{i}] is not a permutation of 0..{m - 1}")
        for i, (row, ranks) in enumerate(zip(self.friends, self.friend_ranks)):
            if len(row) != len(ranks):
                raise InvalidProblem(f"friend_ranks[{i}] length differs from friends[{i}]")
            if len(row) > self.f:
                raise InvalidProblem(f"friends[{i}] lists {len(row)} friends, f={self.f}")
            if len(set(row)) != len(row) or i in row:
                raise InvalidProblem(f"friends[{i}] has duplicates or a self-reference")
            if any(not 0 <= j < n for j in row):
                raise InvalidProblem(f"friends[{i}] references an unknown student")
            if len(set(ranks)) != len(ranks) or any(not 1 <= k <= self.f for k in ranks):
                raise InvalidProblem(f"friend_ranks[{i}] must be distinct ranks in 1..{self.f}")

    @cached_property
    def course_reward(self) -> np.ndarray:
        """``(n, m)`` rewards: top course ``m``, last course 1."""
        reward = np.zeros((self.n, self.m), dtype=np.int64)
        for i, row in enumerate(self.course_rank):
            reward[i, list(row)] = np.arange(self.m, 0, -1)
        reward.setflags(write=False)
        return reward

    @cached_property
    def friend_reward(self) -> tuple[tuple[int, ...], ...]:
        """Rank rewards ``f - rank + 1`` per listed friend, without ``w``."""
        return tuple(tuple(self.f - k + 1 for k in ranks) for ranks in self.friend_ranks)

    def friend_weight(self, student: int, friend: int) -> float:
        """Per-shared-course utility ``student`` gets from ``friend`` (includes ``w``)."""
        try:
            k = self.friends[student].index(friend)
        except ValueError:
            raise InvalidRelation(f"student {friend} is not a friend of student {student}") from None
        return self.friend_reward[student][k] * self.w

    @cached_property
    def friend_edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Flattened directed friendship arcs ``(src, dst, rank_reward)``."""
        src, dst, rew = [], [], []
        for i, (row, rewards) in enumerate(zip(self.friends, self.friend_reward)):
            src.extend([i] * len(row))
            dst.extend(row)
            rew.extend(rewards)
        return (
            np.asarray(src, dtype=np.int64),
            np.asarray(dst, dtype=np.int64),
            np.asarray(rew, dtype=np.float64),
        )

    @property
    def domain(self) -> DomainTable:
        return enumerate_domain(self.m, self.b)


def toy_problem(q: int = 3, w: float = 2.0) -> Problem:
    """Alice, Bob and Charlie choosing 3 of 4 courses.

    Rewards per course (c1..c4): Alice 4,3,2,1; Bob 3,1,4,2; Charlie 1,2,3,4.
    Friend ratings at w=2: Alice rates Bob 6 and Charlie 4, Bob rates Alice 2
    and Charlie 6, Charlie rates Alice 4 and Bob 2.
    """
    return Problem(
        n=3,
        m=4,
        b=3,
        q=q,
        course_rank=((0, 1, 2, 3), (2, 0, 3, 1), (3, 2, 1, 0)),
        friends=((1, 2), (2, 0), (0, 1)),
        friend_ranks=((1, 2), (1, 3), (2, 3)),
        f=3,
        w=w,
        name="toy",
    )


def as_solution(problem: Problem, bundles: Sequence) -> Solution:
    if len(bundles) != problem.n:
        raise InvalidProblem(f"solution has {len(bundles)} bundles, expected {problem.n}")
    return tuple(make_bundle(bundle, problem.m) for bundle in bundles)


def solution_from_values(problem: Problem, values: Sequence[int]) -> Solution:
    bundles = problem.domain.bundles
    return tuple(bundles[v] for v in values)


def course_utility(problem: Problem, student: int, bundle: Bundle) -> float:
    reward = problem.course_reward[student]
    return float(sum(reward[c] for c in bundle))


def friendship_utility(problem: Problem, student: int, solution: Solution) -> float:
    mine = set(solution[student])
    total = 0.0
    for j, rank_reward in zip(problem.friends[student], problem.friend_reward[student]):
        total += rank_reward * problem.w * len(mine.intersection(solution[j]))
    return total


def student_utilities(problem: Problem, solution: Solution) -> tuple[np.ndarray, np.ndarray]:
    """Per-student ``(course, friendship)`` utility arrays."""
    course = np.array([course_utility(problem, i, solution[i]) for i in range(problem.n)])
    friend = np.array([friendship_utility(problem, i, solution) for i in range(problem.n)])
    return course, friend


def total_utility(problem: Problem, solution: Solution) -> float:
    course, friend = student_utilities(problem, solution)
    return float(course.sum() + friend.sum())


def build_unary_table(problem: Problem, student: int, domain: DomainTable | None = None) -> np.ndarray:
    domain = domain or problem.domain
    return (domain.incidence @ problem.course_reward[student]).astype(np.float64)


def build_binary_table(
    problem: Problem, student: int, friend: int, domain: DomainTable | None = None
) -> np.ndarray:
    """``M[a, c]``: utility ``student`` holding bundle ``a`` gets from ``friend`` holding ``c``."""
    domain = domain or problem.domain
    return problem.friend_weight(student, friend) * domain.overlap.astype(np.float64)


def seat_counts(solution: Solution, m: int) -> np.ndarray:
    counts = np.zeros(m, dtype=np.int64)
    for bundle in solution:
        counts[list(bundle)] += 1
    return counts


def joint_score(problem: Problem, q: int | None = None):
    """Fast ``values -> (illegal, total utility)`` over domain indices.

    Equivalent to evaluating the utility functions directly on the decoded
    solution; used by the round scheduler every round.
    """
    domain = problem.domain
    q = problem.q if q is None else q
    unary = problem.course_reward @ domain.incidence.T  # (n, C)
    src, dst, rew = problem.friend_edges
    rows = np.arange(problem.n)
    w = problem.w

    def score(values) -> tuple[int, float]:
        v = np.asarray(values, dtype=np.int64)
        counts = domain.incidence[v].sum(axis=0)
        illegal = int(np.maximum(counts - q, 0).sum())
        utility = float(unary[rows, v].sum())
        if len(src):
            utility += w * float((rew * domain.overlap[v[src], v[dst]]).sum())
        return illegal, utility

    return score
