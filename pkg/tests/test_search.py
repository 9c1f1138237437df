import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coursealloc.model import Problem, toy_problem
from coursealloc.search import (
    SearchConfig,
    best_response,
    dsa_rc_step,
    dsa_step,
    make_agents,
    min_conflict_max_util,
    overflow,
    repair_probability,
    solve,
    valid_mask,
)
from conftest import ALICE
import oracles
from test_model import instances


def idx(problem, *bundles):
    return tuple(problem.domain.index[b] for b in bundles)


def agents_at(problem, snapshot):
    agents = make_agents(problem)
    for a, v in zip(agents, snapshot):
        a.value = v
    return agents


class AlwaysFire:
    def random(self):
        return 0.0


class NeverFire:
    def random(self):
        return 1.0


def counts_of(problem, snapshot):
    return problem.domain.incidence[list(snapshot)].sum(axis=0)


@pytest.mark.parametrize("bad", [dict(alpha=-0.1), dict(alpha=1.5), dict(rounds=0), dict(q=0)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        SearchConfig(**bad)


def test_alpha_zero_never_moves(toy):
    result = solve(toy, SearchConfig(alpha=0.0, rounds=20, q=3), seed=4, algorithm="dsa")
    first = result.run.traces[0].values
    assert all(t.values == first for t in result.run.traces)


def test_alice_alone_takes_top_bundle():
    p = Problem(n=2, m=4, b=3, q=2, course_rank=[(0, 1, 2, 3), (3, 2, 1, 0)], friends=[(), ()])
    snap = idx(p, (1, 2, 3), (1, 2, 3))
    alice = agents_at(p, snap)[0]
    assert alice.utilities(snap).tolist() == [9, 8, 7, 6]
    assert dsa_step(alice, snap, SearchConfig(alpha=1.0, q=2), AlwaysFire()) == 0


def test_alice_follows_bob_when_he_is_her_only_friend():
    p = Problem(
        n=2, m=4, b=3, q=2, course_rank=[(0, 1, 2, 3), (2, 0, 3, 1)], friends=[(1,), ()], friend_ranks=[(1,), ()]
    )
    snap = idx(p, (0, 1, 2), (0, 2, 3))
    alice = agents_at(p, snap)[0]
    util = alice.utilities(snap)
    assert util.tolist() == [9 + 12, 8 + 12, 7 + 18, 6 + 12]
    assert dsa_step(alice, snap, SearchConfig(alpha=1.0, q=2), AlwaysFire()) == p.domain.index[(0, 2, 3)]


def test_alice_best_response_in_toy(toy):
    snap = idx(toy, (0, 1, 2), (0, 2, 3), (1, 2, 3))
    best, options = oracles.best_responses(toy, ALICE, [toy.domain.bundles[v] for v in snap])
    assert (best, options) == (33, [(0, 2, 3)])
    alice = agents_at(toy, snap)[ALICE]
    assert dsa_step(alice, snap, SearchConfig(alpha=1.0, q=3), AlwaysFire()) == toy.domain.index[(0, 2, 3)]


def test_tie_keeps_current_value(toy):
    # with Charlie on {c1,c2,c3}, Alice scores 33 on both {c1,c2,c3} and {c1,c3,c4}
    for current in [(0, 1, 2), (0, 2, 3)]:
        snap = idx(toy, current, (0, 2, 3), (0, 1, 2))
        alice = agents_at(toy, snap)[ALICE]
        assert dsa_step(alice, snap, SearchConfig(alpha=1.0, q=3), AlwaysFire()) == toy.domain.index[current]


def test_repair_probability_examples():
    assert repair_probability(40, 30) == 0.25
    p = toy_problem(q=2)
    snap = idx(p, (0, 1, 2), (0, 1, 2), (0, 1, 2))
    agent = agents_at(p, snap)[0]
    course, max_students = overflow(agent, counts_of(p, snap), 2)
    assert (course, max_students) == (0, 3)
    assert repair_probability(max_students, 2) == pytest.approx(1 / 3)


def test_min_conflict_temp_domain():
    p = Problem(n=3, m=4, b=3, q=2, course_rank=[(0, 1, 2, 3), (1, 2, 3, 0), (1, 2, 3, 0)], friends=[(), (), ()])
    assert [p.domain.bundles[v] for v in p.domain.containing([0])] == [(0, 1, 2), (0, 1, 3), (0, 2, 3)]
    # others fill c2, c3, c4 to capacity; only c1 is open for Alice
    snap = idx(p, (1, 2, 3), (1, 2, 3), (1, 2, 3))
    alice = agents_at(p, snap)[0]
    alice.value = p.domain.index[(0, 1, 2)]
    snap = (alice.value,) + snap[1:]
    assert min_conflict_max_util(alice, snap, 2) == p.domain.index[(0, 1, 2)]


def test_min_conflict_with_no_valid_course_is_best_response(toy):
    snap = idx(toy, (0, 1, 2), (0, 2, 3), (1, 2, 3))
    alice = agents_at(toy, snap)[ALICE]
    # q=1: every course is full among the others
    alice.value = snap[ALICE]
    assert min_conflict_max_util(alice, snap, 1) == best_response(alice, snap)


def test_dsa_rc_toy_zero_illegal(toy):
    for seed in range(10):
        result = solve(toy, SearchConfig(alpha=0.8, rounds=50, q=3), seed)
        assert result.illegal == 0


def test_dsa_rc_with_slack_matches_capacity_aware_dsa():
    p = Problem(n=3, m=4, b=3, q=3, course_rank=toy_problem().course_rank, friends=toy_problem().friends,
                friend_ranks=toy_problem().friend_ranks)
    a = solve(p, SearchConfig(alpha=0.8, rounds=30, q=3), 11, "dsa_rc")
    b = solve(p, SearchConfig(alpha=0.8, rounds=30, q=3, capacity_aware=True), 11, "dsa")
    assert [t.values for t in a.run.traces] == [t.values for t in b.run.traces]


def test_solve_deterministic(toy):
    cfg = SearchConfig(alpha=0.8, rounds=50, q=2)
    a, b = solve(toy, cfg, 7), solve(toy, cfg, 7)
    assert a.run.traces == b.run.traces and a.values == b.values


@st.composite
def snapshots(draw):
    p, sol = draw(instances(max_n=7))
    return p, tuple(p.domain.index[b] for b in sol), draw(st.integers(0, p.n - 1))


@settings(max_examples=1000, deadline=None)
@given(snapshots())
def test_best_response_optimal(case):
    p, snap, i = case
    agent = agents_at(p, snap)[i]
    choice = dsa_step(agent, snap, SearchConfig(alpha=1.0, q=p.q), AlwaysFire())
    best, options = oracles.best_responses(p, i, [p.domain.bundles[v] for v in snap])
    trial = [p.domain.bundles[v] for v in snap]
    trial[i] = p.domain.bundles[choice]
    assert oracles.student_utility(p, i, trial) == pytest.approx(best)


@settings(max_examples=1000, deadline=None)
@given(snapshots(), st.booleans())
def test_dsa_rc_moves_are_feasible(case, fire):
    p, snap, i = case
    agent = agents_at(p, snap)[i]
    counts = counts_of(p, snap)
    worst = overflow(agent, counts, p.q)
    if worst is not None:
        assert 0 < repair_probability(worst[1], p.q) <= 1
    valid = valid_mask(agent, counts, p.q)
    before = agent.value
    after = dsa_rc_step(agent, snap, SearchConfig(alpha=1.0, q=p.q), AlwaysFire() if fire else NeverFire())
    if after != before or (worst is None and fire):
        if valid.any():
            others = counts - p.domain.incidence[before]
            assert (others[list(p.domain.bundles[after])] < p.q).all()
    if not fire:
        assert after == before


@settings(max_examples=300, deadline=None)
@given(instances(max_n=6), st.integers(0, 2**31))
def test_slack_capacity_never_repairs(inst, seed):
    p, _ = inst
    cfg = SearchConfig(alpha=0.8, rounds=5, q=p.n)
    result = solve(p, cfg, seed)
    for trace in result.run.traces:
        counts = counts_of(p, trace.values)
        agents = agents_at(p, trace.values)
        assert all(overflow(a, counts, cfg.q) is None for a in agents)
    assert result.illegal == 0
