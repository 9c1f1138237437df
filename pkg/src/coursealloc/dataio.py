"""Preference ingestion, instance generation, problem files and CSV reports."""

from __future__ import annotations

import csv
import json
import math
import re
import statistics
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .adcop import stream
from .baselines import AgentOrder
from .metrics import RunReport
from .model import InvalidProblem, Problem

SAMPLE_STREAM = 5
FRIEND_STREAM = 6

BUNDLED_PROFILE = "synthetic_courses.soc"


class PrefLibParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ProblemFileError(ValueError):
    pass


@dataclass(frozen=True)
class PreferenceProfile:
    """Strict complete rankings over ``m`` alternatives (0-based) with counts."""

    m: int
    orders: tuple[tuple[int, ...], ...]
    multiplicities: tuple[int, ...]
    names: tuple[str, ...] = ()

    @property
    def voters(self) -> int:
        return sum(self.multiplicities)

    def expanded(self) -> list[tuple[int, ...]]:
        return [order for order, k in zip(self.orders, self.multiplicities) for _ in range(k)]


_HEADER = re.compile(r"^#\s*([A-Z ]+?)\s*(\d+)?\s*:\s*(.*)$")


def _ranking(parts: list[str], m: int | None, lineno: int) -> tuple[int, ...]:
    try:
        order = tuple(int(p) - 1 for p in parts)
    except ValueError:
        raise PrefLibParseError(lineno, "ranking must list integer alternatives (ties are not supported)") from None
    if m is not None and len(order) != m:
        raise PrefLibParseError(lineno, f"ranking has {len(order)} alternatives, expected {m}")
    if len(set(order)) != len(order):
        raise PrefLibParseError(lineno, "duplicate alternative in ranking")
    if sorted(order) != list(range(len(order))):
        raise PrefLibParseError(lineno, "ranking is not a permutation of the alternatives")
    return order


def parse_strict_order_file(text: str) -> PreferenceProfile:
    """Parse PrefLib strict-complete-order data (``.soc``).

    Both the current layout (``# KEY: value`` headers, ``count: a1,a2,...``
    lines) and the legacy one (alternative count, ``i,name`` lines, a
    ``voters,sum,unique`` line, then ``count,a1,a2,...``) are accepted.
    """
    lines = [(k + 1, raw.strip()) for k, raw in enumerate(text.splitlines())]
    lines = [(k, line) for k, line in lines if line]
    if not lines:
        raise PrefLibParseError(1, "empty preference file")
    if re.fullmatch(r"\d+", lines[0][1]):
        return _parse_legacy(lines)

    m = None
    voters = None
    names: dict[int, str] = {}
    counts: dict[tuple[int, ...], int] = {}
    for lineno, line in lines:
        if line.startswith("#"):
            match = _HEADER.match(line)
            if not match:
                continue
            key, num, value = match.groups()
            if key == "NUMBER ALTERNATIVES":
                m = _int(value, lineno)
            elif key == "NUMBER VOTERS":
                voters = _int(value, lineno)
            elif key == "ALTERNATIVE NAME" and num is not None:
                names[int(num)] = value
            elif key == "DATA TYPE" and value.strip().lower() not in ("soc",):
                raise PrefLibParseError(lineno, f"unsupported data type {value.strip()!r}; need soc")
            continue
        if ":" not in line:
            raise PrefLibParseError(lineno, "expected 'count: a1, a2, ...'")
        head, _, body = line.partition(":")
        count = _int(head, lineno)
        if "{" in body:
            raise PrefLibParseError(lineno, "ties are not supported")
        if m is None:
            m = len(names) or len(body.split(","))
        order = _ranking([p.strip() for p in body.split(",")], m, lineno)
        if count > 0:
            counts[order] = counts.get(order, 0) + count
    return _profile(m, counts, voters, names, lines[-1][0])


def _parse_legacy(lines: list[tuple[int, str]]) -> PreferenceProfile:
    m = _int(lines[0][1], lines[0][0])
    if len(lines) < m + 2:
        raise PrefLibParseError(lines[-1][0], "truncated legacy header")
    names = {}
    for lineno, line in lines[1 : m + 1]:
        num, _, name = line.partition(",")
        names[_int(num, lineno)] = name.strip()
    lineno, line = lines[m + 1]
    voters = _int(line.split(",")[0], lineno)
    counts: dict[tuple[int, ...], int] = {}
    for lineno, line in lines[m + 2 :]:
        if "{" in line:
            raise PrefLibParseError(lineno, "ties are not supported")
        parts = [p.strip() for p in line.split(",")]
        count = _int(parts[0], lineno)
        order = _ranking(parts[1:], m, lineno)
        if count > 0:
            counts[order] = counts.get(order, 0) + count
    return _profile(m, counts, voters, names, lines[-1][0])


def _int(text: str, lineno: int) -> int:
    try:
        value = int(text.strip())
    except ValueError:
        raise PrefLibParseError(lineno, f"expected an integer, got {text.strip()!r}") from None
    if value < 0:
        raise PrefLibParseError(lineno, "negative count")
    return value


def _profile(m, counts, voters, names, last_line) -> PreferenceProfile:
    if m is None or not counts:
        raise PrefLibParseError(last_line, "no rankings found")
    total = sum(counts.values())
    if voters is not None and voters != total:
        raise PrefLibParseError(last_line, f"header declares {voters} voters, rankings sum to {total}")
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    label = tuple(names.get(k + 1, f"c{k + 1}") for k in range(m))
    return PreferenceProfile(
        m=m,
        orders=tuple(order for order, _ in ordered),
        multiplicities=tuple(k for _, k in ordered),
        names=label,
    )


def read_preflib(path: str | Path) -> PreferenceProfile:
    return parse_strict_order_file(Path(path).read_text())


def bundled_profile() -> PreferenceProfile:
    """Synthetic stand-in for the 146-student, 9-course PrefLib course data."""
    text = resources.files("coursealloc.data").joinpath(BUNDLED_PROFILE).read_text()
    return parse_strict_order_file(text)


def sample_students(profile: PreferenceProfile, n: int, seed: int) -> list[tuple[int, ...]]:
    if not profile.orders:
        raise ValueError("empty preference profile")
    rng = stream(seed, SAMPLE_STREAM)
    weights = np.asarray(profile.multiplicities, dtype=np.float64)
    picks = rng.choice(len(profile.orders), size=n, replace=True, p=weights / weights.sum())
    return [profile.orders[k] for k in picks]


def gen_friendships(n: int, f: int, seed: int) -> list[tuple[int, ...]]:
    """Each student names ``min(f, n-1)`` distinct others in random rank order."""
    rng = stream(seed, FRIEND_STREAM)
    k = min(f, n - 1) if n > 0 else 0
    lists = []
    for i in range(n):
        others = np.delete(np.arange(n), i)
        lists.append(tuple(int(j) for j in rng.choice(others, size=k, replace=False)))
    return lists


def generate_problem(
    profile: PreferenceProfile,
    n: int,
    q: int,
    seed: int,
    *,
    b: int = 3,
    f: int = 3,
    w: float = 2.0,
) -> Problem:
    return Problem(
        n=n,
        m=profile.m,
        b=b,
        q=q,
        course_rank=sample_students(profile, n, seed),
        friends=gen_friendships(n, f, seed),
        f=f,
        w=w,
        name=f"sampled-n{n}-seed{seed}",
    )


# -- problem files ---------------------------------------------------------

PROBLEM_FORMAT = "coursealloc-problem/1"
_REQUIRED = ("n", "m", "b", "q", "f", "w", "course_rank", "friends")


@dataclass(frozen=True)
class ProblemFile:
    problem: Problem
    order: AgentOrder | None = None
    metadata: dict = field(default_factory=dict)


def problem_to_dict(problem: Problem, order: AgentOrder | None = None, metadata: dict | None = None) -> dict:
    doc = {
        "format": PROBLEM_FORMAT,
        "name": problem.name,
        "n": problem.n,
        "m": problem.m,
        "b": problem.b,
        "q": problem.q,
        "f": problem.f,
        "w": problem.w,
        "course_rank": [list(row) for row in problem.course_rank],
        "friends": [list(row) for row in problem.friends],
        "friend_ranks": [list(row) for row in problem.friend_ranks],
    }
    if order is not None:
        doc["order"] = list(order.order)
    doc["metadata"] = dict(metadata or {})
    return doc


def problem_from_dict(doc: dict) -> ProblemFile:
    if not isinstance(doc, dict):
        raise ProblemFileError("$: expected an object")
    for key in _REQUIRED:
        if key not in doc:
            raise ProblemFileError(f"$.{key}: required field missing")
    for key in ("n", "m", "b", "q", "f"):
        if not isinstance(doc[key], int) or isinstance(doc[key], bool):
            raise ProblemFileError(f"$.{key}: expected an integer")
    if not isinstance(doc["w"], (int, float)) or isinstance(doc["w"], bool):
        raise ProblemFileError("$.w: expected a number")
    if doc["b"] > doc["m"]:
        raise ProblemFileError(f"$.b: bundle size {doc['b']} exceeds course count m={doc['m']}")
    capacities = doc.get("capacities")
    if capacities is not None and any(c != doc["q"] for c in capacities):
        raise ProblemFileError("$.capacities: all courses must share capacity q")
    for key in ("course_rank", "friends", "friend_ranks"):
        rows = doc.get(key)
        if rows is None:
            continue
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise ProblemFileError(f"$.{key}: expected a list of lists")
        for i, row in enumerate(rows):
            for k, x in enumerate(row):
                if not isinstance(x, int) or isinstance(x, bool):
                    raise ProblemFileError(f"$.{key}[{i}][{k}]: expected an integer")
    try:
        problem = Problem(
            n=doc["n"],
            m=doc["m"],
            b=doc["b"],
            q=doc["q"],
            f=doc["f"],
            w=doc["w"],
            course_rank=doc["course_rank"],
            friends=doc["friends"],
            friend_ranks=doc.get("friend_ranks"),
            name=doc.get("name", ""),
        )
    except InvalidProblem as exc:
        raise ProblemFileError(f"$: {exc}") from None
    order = None
    if doc.get("order") is not None:
        try:
            order = AgentOrder(tuple(doc["order"]))
        except (ValueError, TypeError) as exc:
            raise ProblemFileError(f"$.order: {exc}") from None
        if len(order) != problem.n:
            raise ProblemFileError(f"$.order: expected {problem.n} entries")
    return ProblemFile(problem, order, dict(doc.get("metadata") or {}))


def dumps_problem(problem: Problem, order: AgentOrder | None = None, metadata: dict | None = None) -> str:
    return json.dumps(problem_to_dict(problem, order, metadata), indent=1) + "\n"


def loads_problem(text: str) -> ProblemFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"not valid JSON: {exc}") from None
    return problem_from_dict(doc)


def save_problem(
    problem: Problem, path: str | Path, order: AgentOrder | None = None, metadata: dict | None = None
) -> Path:
    path = Path(path)
    path.write_text(dumps_problem(problem, order, metadata))
    return path


def load_problem_file(path: str | Path) -> ProblemFile:
    return loads_problem(Path(path).read_text())


def load_problem(path: str | Path) -> Problem:
    return load_problem_file(path).problem


# -- CSV reports -----------------------------------------------------------

CONFIG_COLUMNS = ["algorithm", "seed", "rep", "n", "m", "b", "q", "f", "w", "rounds", "alpha"]
METRIC_COLUMNS = [
    "total_utility",
    "course_utility",
    "friendship_utility",
    "illegal",
    "first",
    "middle",
    "last",
    "gini",
]
COLUMNS = ["kind", *CONFIG_COLUMNS, *METRIC_COLUMNS, "runs", *(f"{c}_std" for c in METRIC_COLUMNS)]
_GROUP = ("algorithm", "n", "m", "b", "q", "f", "w", "rounds", "alpha")
_INT_COLUMNS = {"seed", "rep", "n", "m", "b", "q", "f", "rounds", "runs"}


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_cells(report: RunReport) -> list[str]:
    row = {"kind": "run", **report.as_row()}
    return [format_cell(row.get(c)) for c in COLUMNS]


def aggregate(reports: Sequence[RunReport]) -> list[dict]:
    """Mean and population standard deviation per (algorithm, configuration)."""
    groups: dict[tuple, list[RunReport]] = {}
    for r in reports:
        groups.setdefault(tuple(getattr(r, k) for k in _GROUP), []).append(r)
    rows = []
    for key, members in groups.items():
        row = {"kind": "aggregate", **dict(zip(_GROUP, key)), "runs": len(members)}
        for col in METRIC_COLUMNS:
            values = [float(getattr(r, col)) for r in members]
            finite = [v for v in values if not math.isnan(v)]
            row[col] = statistics.fmean(finite) if finite else math.nan
            row[f"{col}_std"] = statistics.pstdev(finite) if finite else math.nan
        rows.append(row)
    return rows


def write_reports(reports: Iterable[RunReport], path: str | Path) -> Path:
    reports = list(reports)
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(COLUMNS)
            for r in reports:
                writer.writerow(report_cells(r))
            for row in aggregate(reports):
                writer.writerow([format_cell(row.get(c)) for c in COLUMNS])
    except OSError as exc:
        raise OSError(f"cannot write reports to {path}: {exc}") from exc
    return path


def _parse_cell(column: str, text: str):
    if text == "":
        return None
    if column in ("kind", "algorithm"):
        return text
    if column in _INT_COLUMNS or column == "illegal":
        try:
            return int(text)
        except ValueError:
            return float(text)
    return float(text)


def read_reports(path: str | Path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return [{k: _parse_cell(k, v) for k, v in row.items()} for row in csv.DictReader(fh)]
