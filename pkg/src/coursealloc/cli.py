"""Command line: ``coursealloc {solve,sweep,gen,inspect}``.

Exit status is 0 on success, 2 on usage errors (bad flags, unknown
algorithms, malformed problem files) and 1 on runtime failures.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from collections import Counter
from dataclasses import replace
from pathlib import Path

import numpy as np

from .baselines import feasible
from .dataio import (
    COLUMNS,
    bundled_profile,
    dumps_problem,
    generate_problem,
    load_problem_file,
    read_preflib,
    report_cells,
    write_reports,
)
from .harness import ALGORITHMS, ExperimentSpec, check_algorithms, run_single, run_sweep
from .model import toy_problem


class UsageError(Exception):
    pass


def _csv_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _values(text: str) -> list[float | int]:
    """``40,50,60`` or ``40:90:10`` (inclusive range)."""
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        out = list(np.arange(start, stop + step / 2, step))
    else:
        out = [float(x) for x in _csv_list(text)]
    return [int(v) if float(v).is_integer() else float(v) for v in out]


def _profile(args):
    return read_preflib(args.preflib) if args.preflib else bundled_profile()


def _load_problem(args):
    """Problem and optional fixed order from ``--problem`` or a sampled instance."""
    if args.problem:
        pf = load_problem_file(args.problem)
        problem, order = pf.problem, pf.order
        changes = {k: v for k, v in (("q", args.q), ("w", args.w)) if v is not None}
        if changes:
            problem = replace(problem, **changes)
        return problem, order
    q = args.q if args.q is not None else 30
    w = args.w if args.w is not None else 2.0
    return generate_problem(_profile(args), args.n, q, args.seed, b=args.b, f=args.f, w=w), None


def cmd_solve(args) -> int:
    algos = check_algorithms(_csv_list(args.algos))
    problem, order = _load_problem(args)
    reports = [
        run_single(
            problem,
            a,
            args.seed,
            order=order,
            rounds=args.rounds,
            alpha=args.alpha,
            capacity_aware=args.capacity_aware,
        )
        for a in algos
    ]
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in reports:
        writer.writerow(report_cells(r))
    if args.out:
        out = Path(args.out)
        if out.suffix != ".csv":
            out.mkdir(parents=True, exist_ok=True)
            out = out / "solve.csv"
        write_reports(reports, out)
    return 0


def cmd_sweep(args) -> int:
    if not args.values:
        raise UsageError("--values is required for a sweep")
    problem = None
    if args.problem:
        problem, _ = _load_problem(args)
    spec = ExperimentSpec(
        axis=args.sweep,
        values=tuple(_values(args.values)),
        algorithms=check_algorithms(_csv_list(args.algos)),
        reps=args.reps,
        base_seed=args.seed,
        profile=None if args.problem else _profile(args),
        problem=problem,
        n=args.n,
        q=args.q if args.q is not None else 30,
        b=args.b,
        f=args.f,
        w=args.w if args.w is not None else 2.0,
        rounds=args.rounds,
        alpha=args.alpha,
        capacity_aware=args.capacity_aware,
        jobs=args.jobs,
        out=Path(args.out),
    )
    result = run_sweep(spec)
    print(f"{len(result.reports)} runs, {len(result.failures)} failures -> {args.out}")
    return 1 if result.failures and not result.reports else 0


def cmd_gen(args) -> int:
    if args.toy:
        problem = toy_problem(q=args.q if args.q is not None else 3, w=args.w if args.w is not None else 2.0)
        meta = {"source": "toy three-student example"}
    else:
        problem, _ = _load_problem(args)
        meta = {
            "source": str(args.preflib) if args.preflib else "bundled synthetic profile",
            "seed": args.seed,
            "synthetic": not args.preflib,
        }
    text = dumps_problem(problem, metadata=meta)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_inspect(args) -> int:
    problem, order = _load_problem(args)
    indeg = Counter(j for row in problem.friends for j in row)
    in_degrees = [indeg.get(i, 0) for i in range(problem.n)]
    out_degrees = [len(row) for row in problem.friends]
    top = Counter(c for row in problem.course_rank for c in row[: problem.b])
    print(f"name: {problem.name or '-'}")
    print(f"students n={problem.n}  courses m={problem.m}  bundle b={problem.b}  capacity q={problem.q}")
    print(f"friends f={problem.f}  weight w={problem.w:g}  fixed order: {'yes' if order else 'no'}")
    print(f"seats {problem.m * problem.q} for demand {problem.n * problem.b}: "
          f"{'feasible' if feasible(problem) else 'over-subscribed'}")
    if problem.n:
        print(f"friendship out-degree: min {min(out_degrees)} max {max(out_degrees)}")
        print(f"friendship in-degree: min {min(in_degrees)} max {max(in_degrees)} "
              f"mean {np.mean(in_degrees):.2f}")
        hist = Counter(in_degrees)
        print("in-degree histogram: " + " ".join(f"{d}:{hist[d]}" for d in sorted(hist)))
    print("top-b demand per course: " + " ".join(f"c{c + 1}:{top.get(c, 0)}" for c in range(problem.m)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--problem", type=Path, help="problem file (JSON)")
    src.add_argument("--preflib", type=Path, help="PrefLib .soc profile to sample students from")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--n", type=int, default=90, help="students to sample (default 90)")
    common.add_argument("--q", type=int, default=None, help="course capacity (default 30)")
    common.add_argument("--w", type=float, default=None, help="friendship weight (default 2)")
    common.add_argument("--b", type=int, default=3)
    common.add_argument("--f", type=int, default=3)

    algo = argparse.ArgumentParser(add_help=False)
    algo.add_argument("--algos", default=",".join(ALGORITHMS), help=f"comma list from {','.join(ALGORITHMS)}")
    algo.add_argument("--rounds", type=int, default=50)
    algo.add_argument("--alpha", type=float, default=0.8)
    algo.add_argument("--capacity-aware", action="store_true", help="restrict DSA to seats that are free")

    parser = argparse.ArgumentParser(prog="coursealloc", description="Course allocation with friendships")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common, algo], help="run algorithms once and print report rows")
    p.add_argument("--out", help="CSV file or directory")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", parents=[common, algo], help="repeated runs over an n, q or w sweep")
    p.add_argument("--sweep", choices=["n", "q", "w"], required=True)
    p.add_argument("--values", required=True, help="e.g. 40,50,60 or 40:90:10")
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen", parents=[common], help="write a problem file")
    p.add_argument("--toy", action="store_true", help="the three-student, four-course example")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("inspect", parents=[common], help="summarize a problem")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"coursealloc: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"coursealloc: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
