"""Run the standard sweeps and print a mean table per metric.

    python scripts/run_experiments.py n            # n in 40..90, q=30
    python scripts/run_experiments.py q            # q in 20..60, n=177
    python scripts/run_experiments.py w            # w in 0..5, q=60, n=177
    python scripts/run_experiments.py n --reps 10 --jobs 4 --out runs/n

Each sweep point uses 50 repetitions by default; repetition r runs with
seed base_seed + r. CSV output goes to --out (default runs/<axis>).
"""

from __future__ import annotations

import argparse
import logging
import time
from pathlib import Path

from coursealloc.harness import ALGORITHMS, ExperimentSpec, run_sweep

PRESETS = {
    "n": dict(values=(40, 50, 60, 70, 80, 90), q=30),
    "q": dict(values=(20, 30, 40, 50, 60), n=177),
    "w": dict(values=(0.0, 1.0, 2.0, 3.0, 4.0, 5.0), q=60, n=177),
}
SHOWN = ("total_utility", "illegal", "first", "last", "gini")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("axis", choices=sorted(PRESETS))
    parser.add_argument("--reps", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--capacity-aware", action="store_true")
    parser.add_argument("--out", type=Path)
    args = parser.parse_args()
    logging.basicConfig(level=logging.WARNING)

    preset = PRESETS[args.axis]
    spec = ExperimentSpec(
        axis=args.axis,
        reps=args.reps,
        base_seed=args.seed,
        jobs=args.jobs,
        capacity_aware=args.capacity_aware,
        out=args.out or Path("runs") / args.axis,
        **preset,
    )
    start = time.perf_counter()
    result = run_sweep(spec)
    print(f"{len(result.reports)} runs in {time.perf_counter() - start:.1f} s -> {spec.out}")
    for metric in SHOWN:
        print(f"\n{metric}")
        print(f"{args.axis:>8} " + " ".join(f"{a:>9}" for a in ALGORITHMS))
        for x in spec.values:
            print(f"{x:>8} " + " ".join(f"{result.mean(a, x, metric):9.3f}" for a in ALGORITHMS))
    if result.failures:
        print(f"\n{len(result.failures)} failed runs, see {spec.out / 'failures.csv'}")


if __name__ == "__main__":
    main()
