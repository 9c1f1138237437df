"""Round-based local search agents: DSA and the capacity-repairing DSA_RC.

Each agent owns one variable (its bundle) and decides from the previous
round's snapshot of every agent's value. Seat availability for a candidate
bundle counts the *other* agents only, since the agent vacates its own seats
when it switches; the overflow test on the current bundle counts everyone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .adcop import DomainTable, Snapshot, SyncResult, run_synchronous
from .model import Problem, build_binary_table, build_unary_table, joint_score

TIE_EPS = 1e-9


@dataclass(frozen=True)
class SearchConfig:
    alpha: float = 0.8
    rounds: int = 50
    q: int = 30
    capacity_aware: bool = False

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha={self.alpha} must lie in [0, 1]")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.q < 1:
            raise ValueError("q must be >= 1")


@dataclass
class AgentState:
    agent: int
    value: int
    unary: np.ndarray
    binaries: dict[int, np.ndarray]
    domain: DomainTable = field(repr=False)

    def utilities(self, snapshot: Snapshot) -> np.ndarray:
        """Own utility of every domain value given the others' values."""
        util = self.unary.copy()
        for j, table in self.binaries.items():
            util += table[:, snapshot[j]]
        return util


class _Occupancy:
    """Seat counts of one snapshot, shared by all agents of a round."""

    def __init__(self, domain: DomainTable):
        self.domain = domain
        self._snapshot = None
        self._counts = None

    def __call__(self, snapshot: Snapshot) -> np.ndarray:
        if snapshot is not self._snapshot:
            self._counts = self.domain.incidence[list(snapshot)].sum(axis=0)
            self._counts.setflags(write=False)
            self._snapshot = snapshot
        return self._counts


def make_agents(problem: Problem, domain: DomainTable | None = None) -> list[AgentState]:
    domain = domain or problem.domain
    return [
        AgentState(
            agent=i,
            value=-1,
            unary=build_unary_table(problem, i, domain),
            binaries={j: build_binary_table(problem, i, j, domain) for j in problem.friends[i]},
            domain=domain,
        )
        for i in range(problem.n)
    ]


def _counts(state: AgentState, snapshot: Snapshot, occupancy=None) -> np.ndarray:
    if occupancy is not None:
        return occupancy(snapshot)
    return state.domain.incidence[list(snapshot)].sum(axis=0)


def valid_mask(state: AgentState, counts: np.ndarray, q: int) -> np.ndarray:
    """Bundles whose every course has a free seat once this agent leaves its own."""
    others = counts - state.domain.incidence[state.value]
    full = (others >= q).astype(np.int64)
    return state.domain.incidence @ full == 0


def _argmax_keep(util: np.ndarray, candidates: np.ndarray, current: int | None) -> int:
    """Best candidate; the current value wins ties, then the lowest index."""
    best = int(candidates[np.argmax(util[candidates])])
    if current is not None and current in candidates and util[current] >= util[best] - TIE_EPS:
        return current
    return best


def best_response(state: AgentState, snapshot: Snapshot) -> int:
    util = state.utilities(snapshot)
    return _argmax_keep(util, np.arange(len(util)), state.value)


def dsa_step(
    state: AgentState,
    snapshot: Snapshot,
    config: SearchConfig,
    rng: np.random.Generator,
    occupancy=None,
) -> int:
    if rng.random() < config.alpha:
        util = state.utilities(snapshot)
        if config.capacity_aware:
            valid = valid_mask(state, _counts(state, snapshot, occupancy), config.q)
            candidates = np.union1d(np.flatnonzero(valid), [state.value])
        else:
            candidates = np.arange(len(util))
        state.value = _argmax_keep(util, candidates, state.value)
    return state.value


def overflow(state: AgentState, counts: np.ndarray, q: int) -> tuple[int, int] | None:
    """Most overflowing course of the current bundle and its occupancy.

    Returns ``None`` when no course of the bundle exceeds ``q``. Equal
    overflows resolve to the lowest course index.
    """
    bundle = state.domain.bundles[state.value]
    worst = None
    for c in bundle:
        if counts[c] > q and (worst is None or counts[c] > counts[worst]):
            worst = c
    if worst is None:
        return None
    return worst, int(counts[worst])


def repair_probability(max_students: int, q: int) -> float:
    return (max_students - q) / max_students


def min_conflict_max_util(
    state: AgentState,
    snapshot: Snapshot,
    q: int,
    domain: DomainTable | None = None,
    occupancy=None,
) -> int:
    """Best bundle among those holding every course that still has a free seat."""
    domain = domain or state.domain
    counts = _counts(state, snapshot, occupancy)
    others = counts - domain.incidence[state.value]
    valid_courses = np.flatnonzero(others < q)
    temp_domain = domain.containing(valid_courses)
    util = state.utilities(snapshot)
    return _argmax_keep(util, temp_domain, None)


def dsa_rc_step(
    state: AgentState,
    snapshot: Snapshot,
    config: SearchConfig,
    rng: np.random.Generator,
    occupancy=None,
) -> int:
    q = config.q
    counts = _counts(state, snapshot, occupancy)
    worst = overflow(state, counts, q)
    if worst is not None:
        _, max_students = worst
        beta = repair_probability(max_students, q)
        if rng.random() < beta:
            valid = np.flatnonzero(valid_mask(state, counts, q))
            if len(valid):
                state.value = _argmax_keep(state.utilities(snapshot), valid, None)
            else:
                state.value = min_conflict_max_util(state, snapshot, q, occupancy=occupancy)
    elif rng.random() < config.alpha:
        valid = np.flatnonzero(valid_mask(state, counts, q))
        if len(valid):
            state.value = _argmax_keep(state.utilities(snapshot), valid, state.value)
    return state.value


@dataclass(frozen=True)
class SearchResult:
    values: Snapshot
    illegal: int
    utility: float
    best_round: int
    run: SyncResult


def solve(problem: Problem, config: SearchConfig, seed: int, algorithm: str = "dsa_rc") -> SearchResult:
    """Run DSA or DSA_RC from random initial values; report the anytime best."""
    step_fn = {"dsa": dsa_step, "dsa_rc": dsa_rc_step}[algorithm]
    domain = problem.domain
    agents = make_agents(problem, domain)
    occupancy = _Occupancy(domain)

    def init(i: int, rng: np.random.Generator) -> int:
        agents[i].value = int(rng.integers(len(domain)))
        return agents[i].value

    def bind(state: AgentState):
        return lambda snapshot, rng: step_fn(state, snapshot, config, rng, occupancy)

    run = run_synchronous(
        [bind(a) for a in agents],
        config.rounds,
        seed,
        initial=init,
        score=joint_score(problem, config.q),
    )
    illegal, utility = run.tracker.best_key
    return SearchResult(run.tracker.best_solution, illegal, utility, run.tracker.best_round, run)
