"""Experiment runner: single runs and seeded parameter sweeps.

Seed arithmetic: repetition ``r`` of a sweep uses ``seed = base_seed + r``.
That one integer drives the student sample, the friendship network, the
agent order and every algorithm's random streams (each through its own
stream tag), so any row can be re-run from its ``seed`` column alone.
"""

from __future__ import annotations

import csv
import logging
import math
import statistics
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import baselines
from .baselines import AgentOrder, random_order
from .dataio import METRIC_COLUMNS, PreferenceProfile, bundled_profile, generate_problem, write_reports
from .metrics import RunReport, report
from .model import Problem, Solution
from .search import SearchConfig, solve

log = logging.getLogger(__name__)

ALGORITHMS = ("dsa_rc", "dsa", "hbs", "rsd", "greedy", "random")
AXES = ("n", "q", "w")


class UnknownAlgorithm(ValueError):
    def __init__(self, name: str):
        super().__init__(f"unknown algorithm {name!r}; valid names: {', '.join(ALGORITHMS)}")


def check_algorithms(names: Sequence[str]) -> tuple[str, ...]:
    names = tuple(names)
    for name in names:
        if name not in ALGORITHMS:
            raise UnknownAlgorithm(name)
    if not names:
        raise ValueError("at least one algorithm is required")
    return names


def run_algorithm(
    problem: Problem,
    algorithm: str,
    order: AgentOrder,
    seed: int,
    *,
    rounds: int = 50,
    alpha: float = 0.8,
    capacity_aware: bool = False,
) -> tuple[Solution, dict]:
    """Solve one instance; DSA variants return their anytime-best solution."""
    if algorithm in ("dsa", "dsa_rc"):
        config = SearchConfig(alpha=alpha, rounds=rounds, q=problem.q, capacity_aware=capacity_aware)
        result = solve(problem, config, seed, algorithm)
        bundles = problem.domain.bundles
        return tuple(bundles[v] for v in result.values), {"best_round": result.best_round}
    if algorithm == "hbs":
        return baselines.hbs(problem, order), {}
    if algorithm == "rsd":
        return baselines.rsd(problem, order), {}
    if algorithm == "greedy":
        return baselines.greedy(problem), {}
    if algorithm == "random":
        return baselines.random_alloc(problem, seed), {}
    raise UnknownAlgorithm(algorithm)


def run_single(
    problem: Problem,
    algorithm: str,
    seed: int,
    *,
    order: AgentOrder | None = None,
    rounds: int = 50,
    alpha: float = 0.8,
    capacity_aware: bool = False,
    rep: int = 0,
    **meta,
) -> RunReport:
    check_algorithms([algorithm])
    order = order or random_order(problem.n, seed)
    solution, extra = run_algorithm(
        problem, algorithm, order, seed, rounds=rounds, alpha=alpha, capacity_aware=capacity_aware
    )
    local = algorithm in ("dsa", "dsa_rc")
    return report(
        problem,
        solution,
        order,
        algorithm=algorithm,
        seed=seed,
        rounds=rounds if local else 0,
        alpha=alpha if local else 0.0,
        rep=rep,
        **extra,
        **meta,
    )


@dataclass(frozen=True)
class ExperimentSpec:
    axis: str
    values: tuple
    algorithms: tuple[str, ...] = ALGORITHMS
    reps: int = 50
    base_seed: int = 0
    profile: PreferenceProfile | None = None
    problem: Problem | None = None
    n: int = 177
    q: int = 30
    b: int = 3
    f: int = 3
    w: float = 2.0
    rounds: int = 50
    alpha: float = 0.8
    capacity_aware: bool = False
    jobs: int = 1
    out: Path | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"sweep axis must be one of {AXES}, got {self.axis!r}")
        if not self.values:
            raise ValueError("sweep values must be non-empty")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        object.__setattr__(self, "algorithms", check_algorithms(self.algorithms))
        if self.axis == "n" and self.problem is not None:
            raise ValueError("an n sweep resamples students; give a preference profile, not a problem file")

    def base_problem(self) -> Problem:
        """Fixed instance for q and w sweeps."""
        if self.problem is not None:
            return self.problem
        profile = self.profile or bundled_profile()
        return generate_problem(profile, self.n, self.q, self.base_seed, b=self.b, f=self.f, w=self.w)

    def instance(self, x, seed: int, base: Problem | None) -> Problem:
        if self.axis == "n":
            profile = self.profile or bundled_profile()
            return generate_problem(profile, int(x), self.q, seed, b=self.b, f=self.f, w=self.w)
        if self.axis == "q":
            return replace(base, q=int(x))
        return replace(base, w=float(x))


@dataclass(frozen=True)
class Failure:
    algorithm: str
    x: object
    rep: int
    seed: int
    error: str


def _run_point(spec: ExperimentSpec, x, rep: int, base: Problem | None):
    seed = spec.base_seed + rep
    problem = spec.instance(x, seed, base)
    order = random_order(problem.n, seed)
    provenance = {
        "axis": spec.axis,
        "x": x,
        "base_seed": spec.base_seed,
        "friendships": "resampled per repetition" if spec.axis == "n" else "fixed",
    }
    reports, failures = [], []
    for algorithm in spec.algorithms:
        try:
            reports.append(
                run_single(
                    problem,
                    algorithm,
                    seed,
                    order=order,
                    rounds=spec.rounds,
                    alpha=spec.alpha,
                    capacity_aware=spec.capacity_aware,
                    rep=rep,
                    **provenance,
                )
            )
        except Exception as exc:  # recorded per row; the sweep goes on
            log.exception("run failed: %s x=%s rep=%d", algorithm, x, rep)
            failures.append(Failure(algorithm, x, rep, seed, repr(exc)))
    return reports, failures


@dataclass
class SweepResult:
    reports: list[RunReport]
    failures: list[Failure]

    def by_algorithm(self, algorithm: str) -> list[RunReport]:
        return [r for r in self.reports if r.algorithm == algorithm]

    def mean(self, algorithm: str, x, metric: str) -> float:
        values = [
            float(getattr(r, metric))
            for r in self.reports
            if r.algorithm == algorithm and r.extra.get("x") == x
        ]
        values = [v for v in values if not math.isnan(v)]
        return statistics.fmean(values) if values else math.nan


def run_sweep(spec: ExperimentSpec) -> SweepResult:
    base = spec.base_problem() if spec.axis != "n" else None
    tasks = [(x, rep) for x in spec.values for rep in range(spec.reps)]
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            futures = [pool.submit(_run_point, spec, x, rep, base) for x, rep in tasks]
            outcomes = [fut.result() for fut in futures]
    else:
        outcomes = [_run_point(spec, x, rep, base) for x, rep in tasks]
    reports = [r for rs, _ in outcomes for r in rs]
    failures = [f for _, fs in outcomes for f in fs]
    result = SweepResult(reports, failures)
    if spec.out is not None:
        write_sweep(spec, result, Path(spec.out))
    return result


def write_sweep(spec: ExperimentSpec, result: SweepResult, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    paths = [write_reports(result.by_algorithm(a), out / f"{a}.csv") for a in spec.algorithms]
    plot = out / "plot_data.csv"
    with plot.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["algorithm", "metric", "axis", "x", "mean", "std", "runs"])
        for algorithm in spec.algorithms:
            for metric in METRIC_COLUMNS:
                for x in spec.values:
                    values = [
                        float(getattr(r, metric))
                        for r in result.reports
                        if r.algorithm == algorithm and r.extra.get("x") == x
                    ]
                    values = [v for v in values if not math.isnan(v)]
                    mean = statistics.fmean(values) if values else math.nan
                    std = statistics.pstdev(values) if values else math.nan
                    writer.writerow([algorithm, metric, spec.axis, x, repr(mean), repr(std), len(values)])
    paths.append(plot)
    if result.failures:
        fail = out / "failures.csv"
        with fail.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["algorithm", "x", "rep", "seed", "error"])
            for f in result.failures:
                writer.writerow([f.algorithm, f.x, f.rep, f.seed, f.error])
        paths.append(fail)
    return paths
