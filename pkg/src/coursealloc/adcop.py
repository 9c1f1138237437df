"""Synchronous ADCOP engine: bundle domains, round scheduler, anytime tracking."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

Bundle = tuple[int, ...]
Snapshot = tuple[int, ...]
StepFn = Callable[[Snapshot, np.random.Generator], int]
InitFn = Callable[[int, np.random.Generator], int]
ScoreFn = Callable[[Snapshot], tuple[int, float]]

# Stream tags keep the random streams of different purposes apart for one seed.
AGENT_STREAM = 1


class InvalidParameters(ValueError):
    pass


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``.

    Every random draw in the package goes through here, so any single run can
    be replayed from its seed alone.
    """
    return np.random.default_rng([int(seed), *map(int, key)])


def agent_streams(seed: int, n: int) -> list[np.random.Generator]:
    return [stream(seed, AGENT_STREAM, i) for i in range(n)]


def make_bundle(courses, m: int, b: int | None = None) -> Bundle:
    bundle = tuple(sorted(int(c) for c in courses))
    if len(set(bundle)) != len(bundle):
        raise InvalidParameters(f"duplicate course in bundle {bundle}")
    if bundle and (bundle[0] < 0 or bundle[-1] >= m):
        raise InvalidParameters(f"course index out of range [0, {m}) in {bundle}")
    if b is not None and len(bundle) != b:
        raise InvalidParameters(f"bundle {bundle} has size {len(bundle)}, expected {b}")
    return bundle


@dataclass(frozen=True, eq=False)
class DomainTable:
    """All size-``b`` bundles over ``m`` courses in lexicographic order.

    ``incidence[v, c]`` is 1 when bundle ``v`` contains course ``c`` and
    ``overlap[v, u]`` is the number of courses bundles ``v`` and ``u`` share.
    """

    m: int
    b: int
    bundles: tuple[Bundle, ...]
    index: dict[Bundle, int] = field(repr=False)
    incidence: np.ndarray = field(repr=False)
    overlap: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.bundles)

    def containing(self, courses) -> np.ndarray:
        """Indices of the bundles that include every course in ``courses``."""
        courses = list(courses)
        if not courses:
            return np.arange(len(self.bundles))
        mask = self.incidence[:, courses].sum(axis=1) == len(courses)
        return np.flatnonzero(mask)


@lru_cache(maxsize=64)
def enumerate_domain(m: int, b: int) -> DomainTable:
    if b < 1 or b > m:
        raise InvalidParameters(f"bundle size b={b} must satisfy 1 <= b <= m={m}")
    bundles = tuple(combinations(range(m), b))
    assert len(bundles) == comb(m, b)
    incidence = np.zeros((len(bundles), m), dtype=np.int64)
    for v, bundle in enumerate(bundles):
        incidence[v, list(bundle)] = 1
    overlap = incidence @ incidence.T
    incidence.setflags(write=False)
    overlap.setflags(write=False)
    return DomainTable(
        m=m,
        b=b,
        bundles=bundles,
        index={bundle: v for v, bundle in enumerate(bundles)},
        incidence=incidence,
        overlap=overlap,
    )


@dataclass(frozen=True)
class RoundTrace:
    round: int
    values: Snapshot


@dataclass(frozen=True)
class AnytimeTracker:
    """Best joint assignment seen so far.

    Ordering: fewer illegal assignments first, then higher total utility.
    """

    best_solution: Snapshot | None = None
    best_key: tuple[int, float] | None = None
    best_round: int = -1

    def better(self, illegal: int, utility: float) -> bool:
        if self.best_key is None:
            return True
        best_illegal, best_utility = self.best_key
        return (illegal, -utility) < (best_illegal, -best_utility)


def anytime_update(
    tracker: AnytimeTracker,
    solution: Snapshot,
    illegal: int,
    utility: float,
    round: int = -1,
) -> AnytimeTracker:
    if illegal < 0:
        raise InvalidParameters("illegal count must be non-negative")
    if tracker.better(illegal, utility):
        return AnytimeTracker(tuple(solution), (int(illegal), float(utility)), round)
    return tracker


@dataclass(frozen=True)
class SyncResult:
    final: Snapshot
    traces: list[RoundTrace]
    tracker: AnytimeTracker


def run_synchronous(
    steps: Sequence[StepFn],
    rounds: int,
    seed: int,
    *,
    initial: Sequence[int] | InitFn,
    score: ScoreFn | None = None,
) -> SyncResult:
    """Run ``rounds`` synchronous collect-decide-send cycles.

    Every agent sees the same immutable snapshot of the previous round and
    draws only from its own stream, so the order in which agents of one round
    are evaluated cannot change the outcome. ``score`` maps a joint
    assignment to ``(illegal, utility)`` for the anytime tracker; without it
    the tracker simply follows the latest round.
    """
    if rounds < 1:
        raise InvalidParameters("rounds must be >= 1")
    rngs = agent_streams(seed, len(steps))
    if callable(initial):
        values = tuple(int(initial(i, rng)) for i, rng in enumerate(rngs))
    else:
        if len(initial) != len(steps):
            raise InvalidParameters("one initial value per agent required")
        values = tuple(int(v) for v in initial)

    traces: list[RoundTrace] = []
    tracker = AnytimeTracker()
    for t in range(1, rounds + 1):
        snapshot = values
        values = tuple(int(step(snapshot, rng)) for step, rng in zip(steps, rngs))
        traces.append(RoundTrace(t, values))
        illegal, utility = score(values) if score is not None else (0, float(t))
        tracker = anytime_update(tracker, values, illegal, utility, t)
    return SyncResult(values, traces, tracker)
