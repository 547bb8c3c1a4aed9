import csv
import json
import math

import numpy as np
import pytest

from strongsidon.analysis import (
    CountingProfile,
    ExperimentConfig,
    counting_function,
    estimate_exponent,
    geometric_checkpoints,
    read_set_file,
    run_experiment,
)
from strongsidon.cli import main
from strongsidon.errors import InsufficientData
from strongsidon.params import StrongParams


def test_counting_examples():
    prof = counting_function([1, 3, 7], [5, 10])
    assert prof.counts == [2, 3]
    assert counting_function([], [1, 10, 100]).counts == [0, 0, 0]
    with pytest.raises(ValueError):
        counting_function([1], [5, 3])


def test_counting_invariants():
    xs = [1, 2, 4, 8, 13, 21, 31, 45, 66, 81]
    prof = counting_function(xs)
    assert all(a <= b for a, b in zip(prof.counts, prof.counts[1:]))
    assert all(c <= n for n, c in prof.rows())


def test_geometric_checkpoints():
    cps = geometric_checkpoints(100)
    assert cps[:6] == [1, 2, 4, 5, 8, 11]
    assert cps[-1] == 100 and cps == sorted(set(cps))


def test_exponent_of_squares():
    squares = [k * k for k in range(1, 1001)]
    prof = counting_function(squares)
    assert estimate_exponent(prof) == pytest.approx(0.5, abs=0.02)
    assert prof.fitted_exponent is not None and prof.window[0] == 10


def test_exponent_of_all_integers():
    prof = counting_function(range(1, 10 ** 5 + 1))
    assert estimate_exponent(prof) == pytest.approx(1.0, abs=1e-6)


def test_exponent_insufficient_data():
    with pytest.raises(InsufficientData):
        estimate_exponent(counting_function([], [1, 2, 3]))
    with pytest.raises(InsufficientData):
        estimate_exponent(CountingProfile([10, 20], [1, 2]), (15, 18))


def test_read_set_file_formats(tmp_path):
    (tmp_path / "a.txt").write_text("3 1\n2\n")
    (tmp_path / "b.json").write_text("[5, 1, 3]")
    assert read_set_file(tmp_path / "a.txt") == ([1, 2, 3], None)
    assert read_set_file(tmp_path / "b.json") == ([1, 3, 5], None)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig("greedy")
    with pytest.raises(ValueError):
        ExperimentConfig("dance", n_max=3)
    cfg = ExperimentConfig("construct", params=StrongParams(2, 0, 1), k_max=5)
    assert cfg.resolved_c() == pytest.approx(math.sqrt(2) - 1)


# ---- CLI ---------------------------------------------------------------------


def run(tmp_path, *argv):
    out = tmp_path / "out"
    code = main([*argv, "--out", str(out)])
    return code, out


def jsonl(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


def test_cli_verify_violation(tmp_path):
    f = tmp_path / "s.txt"
    f.write_text("1 2 3")
    code, out = run(tmp_path, "verify", str(f), "--h", "2", "--alpha", "0")
    assert code == 1
    rows = jsonl(out / "violations.jsonl")
    assert len(rows) == 1 and rows[0]["left"] == [1, 3] and rows[0]["right"] == [2, 2]


def test_cli_verify_clean(tmp_path):
    f = tmp_path / "s.json"
    f.write_text("[1, 2, 4, 8]")
    code, out = run(tmp_path, "verify", str(f))
    assert code == 0 and (out / "violations.jsonl").read_text() == ""


def test_cli_greedy(tmp_path):
    code, out = run(tmp_path, "greedy", "--n-max", "25")
    assert code == 0
    assert json.loads((out / "set.json").read_text())["elements"] == ["1", "2", "4", "8", "13", "21"]
    with open(out / "counting.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "count"]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["finite_upper_bound_ok"] and summary["violations"] == 0


def test_cli_partition(tmp_path):
    code, out = run(tmp_path, "partition", "--c", "0.45", "--k-max", "5")
    assert code == 0
    with open(out / "partition.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["k", "lower", "upper", "count"]
    assert {r["k"]: int(r["count"]) for r in rows} == {"3": 0, "4": 1, "5": 2}


def test_cli_construct_and_reverify(tmp_path):
    code, out = run(tmp_path, "construct", "--k-max", "8", "--alpha", "0.2", "--basis", "random", "--seed", "3")
    assert code == 0
    set_json = json.loads((out / "set.json").read_text())
    for key in ("h", "alpha", "gamma", "c", "basis", "elements", "pruned"):
        assert key in set_json
    assert set(set_json["basis"]) == {"h", "q_primes", "prim_roots", "strategy", "seed"}
    summary = json.loads((out / "summary.json").read_text())
    assert summary["violations_after"] == 0
    assert summary["c"] == pytest.approx(summary["optimal_c"])
    assert (out / "pruning.csv").read_text().startswith("k,part_size,bad_count,fraction")
    # the set file feeds straight back into verify and analyze
    code2 = main(["verify", str(out / "set.json"), "--out", str(tmp_path / "v")])
    assert code2 == 0
    code3 = main(["analyze", str(out / "set.json"), "--out", str(tmp_path / "a")])
    assert code3 == 0
    a = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert a["size"] == len(set_json["elements"])


def test_cli_construct_reports_violations(tmp_path):
    code, out = run(
        tmp_path, "construct", "--k-max", "7", "--c", "0.45", "--alpha", "0.9", "--basis", "random", "--seed", "1"
    )
    rows = jsonl(out / "violations.jsonl")
    assert rows and all("ell" in r and "applicable" in r for r in rows)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["violations_before"] == len(rows) and summary["violations_after"] == 0
    assert code == 0


def test_cli_random_transfer(tmp_path):
    code, out = run(
        tmp_path, "random-transfer", "--delta", "0.9", "--n-max", "20000", "--seed", "4", "--mc-trials", "200"
    )
    assert code == 0
    sample = json.loads((out / "sample.json").read_text())
    assert set(sample) == {"delta", "n_max", "seed", "members"}
    summary = json.loads((out / "summary.json").read_text())
    assert summary["subset_of_sample"] and summary["violations"] == 0
    assert summary["strong_gamma"] == pytest.approx(2 * 2 * 2 ** (1 + 1 / 0.9))
    assert (out / "replications.csv").read_text().startswith("i,exact_p,empirical_p,n_trials")


def test_cli_exit_codes(tmp_path):
    assert main(["greedy", "--out", str(tmp_path / "a")]) == 2
    err = json.loads((tmp_path / "a" / "error.json").read_text())
    assert err["exit_code"] == 2
    assert main(["construct", "--k-max", "6", "--c", "0.7", "--out", str(tmp_path / "b")]) == 2
    assert json.loads((tmp_path / "b" / "error.json").read_text())["error"] == "InvalidC"
    assert main(["greedy", "--n-max", "40", "--mem-budget", "100", "--out", str(tmp_path / "c")]) == 3
    assert main(["verify", str(tmp_path / "missing.txt"), "--out", str(tmp_path / "d")]) == 2
    assert main(["greedy", "--n-max", "10", "--alpha", "1.5", "--out", str(tmp_path / "e")]) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["greedy", "--n-max", "3000", "--alpha", "0.3", "--gamma", "2"],
        ["construct", "--k-max", "8", "--basis", "random", "--seed", "5"],
        ["random-transfer", "--delta", "0.8", "--n-max", "5000", "--seed", "2", "--mc-trials", "50"],
        ["partition", "--k-max", "9", "--f-log-base", "2"],
    ],
)
def test_cli_deterministic(tmp_path, argv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main([*argv, "--out", str(a)]) == main([*argv, "--out", str(b)])
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        x, y = (a / name).read_text(), (b / name).read_text()
        if name == "summary.json":
            x, y = json.loads(x), json.loads(y)
            for d in (x, y):
                d.pop("timestamp")
                d["config"].pop("input", None)
        assert x == y, name
