import csv
import io
import subprocess
import sys

import pytest

from coursealloc.cli import main
from coursealloc.dataio import COLUMNS, read_reports, save_problem
from coursealloc.harness import ExperimentSpec, UnknownAlgorithm, run_single, run_sweep
from coursealloc.model import toy_problem
import oracles


@pytest.fixture
def toy_file(tmp_path):
    return save_problem(toy_problem(), tmp_path / "toy.json")


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_solve_greedy_matches_oracle(toy_file, capsys):
    assert main(["solve", "--problem", str(toy_file), "--algos", "greedy"]) == 0
    (row,) = rows(capsys.readouterr().out)
    toy = toy_problem()
    greedy = [tuple(sorted(r[: toy.b])) for r in toy.course_rank]
    assert greedy == [(0, 1, 2), (0, 2, 3), (1, 2, 3)]
    assert float(row["total_utility"]) == oracles.total(toy, greedy) == 75
    assert float(row["illegal"]) == 0


def test_solve_is_deterministic(toy_file, capsys):
    main(["solve", "--problem", str(toy_file), "--seed", "4"])
    first = capsys.readouterr().out
    main(["solve", "--problem", str(toy_file), "--seed", "4"])
    assert capsys.readouterr().out == first
    assert len(rows(first)) == 6


def test_unknown_algorithm_is_usage_error(toy_file, capsys):
    assert main(["solve", "--problem", str(toy_file), "--algos", "greedy,simplex"]) == 2
    err = capsys.readouterr().err
    assert "simplex" in err and "dsa_rc" in err and "random" in err
    with pytest.raises(UnknownAlgorithm):
        run_single(toy_problem(), "simplex", 0)


def test_malformed_problem_file_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": "coursealloc-problem/1", "n": 1}')
    assert main(["solve", "--problem", str(bad)]) == 2


def test_bad_flag_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["solve", "--rounds", "many"])
    assert err.value.code == 2


def test_gen_and_inspect(tmp_path, capsys):
    out = tmp_path / "p.json"
    assert main(["gen", "--n", "40", "--seed", "2", "--out", str(out)]) == 0
    assert main(["inspect", "--problem", str(out)]) == 0
    text = capsys.readouterr().out
    assert "n=40" in text and "out-degree: min 3 max 3" in text
    assert main(["gen", "--toy"]) == 0
    assert '"n": 3' in capsys.readouterr().out


def test_sweep_single_row(tmp_path, capsys):
    out = tmp_path / "sweep"
    code = main(["sweep", "--sweep", "n", "--values", "40", "--reps", "1", "--algos", "hbs", "--out", str(out)])
    assert code == 0
    data = read_reports(out / "hbs.csv")
    assert [r["kind"] for r in data] == ["run", "aggregate"]
    plot = rows((out / "plot_data.csv").read_text())
    assert {r["metric"] for r in plot} >= {"total_utility", "illegal", "gini"}


def test_sweep_rows_and_input_identity():
    spec = ExperimentSpec(axis="n", values=(40, 50), reps=3, rounds=5)
    result = run_sweep(spec)
    assert len(result.reports) == 2 * 3 * 6 and not result.failures
    for x in (40, 50):
        for rep in range(3):
            group = [r for r in result.reports if r.extra["x"] == x and r.rep == rep]
            assert {r.seed for r in group} == {rep}
            assert len({(r.n, r.q, r.w) for r in group}) == 1
            # every algorithm is scored against the same nominal order
            by_algo = {r.algorithm: r for r in group}
            assert by_algo["greedy"].extra == by_algo["hbs"].extra


def test_q_and_w_sweeps_hold_problem_fixed():
    spec = ExperimentSpec(axis="w", values=(0.0, 2.0), reps=2, n=40, q=60, algorithms=("greedy",))
    result = run_sweep(spec)
    course = {r.course_utility for r in result.reports}
    assert len(course) == 1
    assert result.mean("greedy", 0.0, "friendship_utility") == 0


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(axis="x", values=(1,))
    with pytest.raises(ValueError):
        ExperimentSpec(axis="n", values=())
    with pytest.raises(ValueError):
        ExperimentSpec(axis="n", values=(40,), reps=0)


def test_module_entry_point(toy_file):
    proc = subprocess.run(
        [sys.executable, "-m", "coursealloc", "solve", "--problem", str(toy_file), "--algos", "rsd"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == ",".join(COLUMNS)
