"""Write the bundled synthetic course-preference profile (PrefLib .soc layout).

The real 146-student / 9-course PrefLib course data is not redistributed
here. This draws a stand-in of the same shape from a Mallows model around a
fixed central ranking, sampled with the repeated-insertion method.

    python scripts/make_synthetic_profile.py [--phi 0.55] [--seed 2003] [--out PATH]
"""

from __future__ import annotations

import argparse
from collections import Counter
from pathlib import Path

import numpy as np

M = 9
VOTERS = 146
DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src/coursealloc/data/synthetic_courses.soc"


def mallows(center: list[int], phi: float, rng: np.random.Generator) -> tuple[int, ...]:
    ranking: list[int] = []
    for i, item in enumerate(center):
        # insert at position j (0 = top) with weight phi ** (i - j)
        weights = phi ** (i - np.arange(i + 1))
        j = rng.choice(i + 1, p=weights / weights.sum())
        ranking.insert(int(j), item)
    return tuple(ranking)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--phi", type=float, default=0.55)
    ap.add_argument("--seed", type=int, default=2003)
    ap.add_argument("--voters", type=int, default=VOTERS)
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    center = [int(c) for c in rng.permutation(M) + 1]
    votes = Counter(mallows(center, args.phi, rng) for _ in range(args.voters))
    rows = sorted(votes.items(), key=lambda kv: (-kv[1], kv[0]))

    lines = [
        f"# FILE NAME: {args.out.name}",
        "# TITLE: Synthetic course preferences (Mallows stand-in, not real student data)",
        f"# DESCRIPTION: Mallows model, phi={args.phi}, seed={args.seed}, center={','.join(map(str, center))}",
        "# DATA TYPE: soc",
        "# MODIFICATION TYPE: synthetic",
        f"# NUMBER ALTERNATIVES: {M}",
        f"# NUMBER VOTERS: {args.voters}",
        f"# NUMBER UNIQUE ORDERS: {len(rows)}",
        *(f"# ALTERNATIVE NAME {k}: Course {k}" for k in range(1, M + 1)),
        *(f"{count}: {','.join(map(str, order))}" for order, count in rows),
    ]
    args.out.write_text("\n".join(lines) + "\n")
    print(f"wrote {args.out} ({len(rows)} unique orders, {args.voters} voters)")


if __name__ == "__main__":
    main()
