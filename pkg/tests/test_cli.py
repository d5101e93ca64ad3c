import csv
import io
import json
import subprocess
import sys

import pytest

from bridgeheights.cli import run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_moments_zero():
    code, out, _ = call("moments", "--n", "1", "--s", "0")
    assert code == 0
    assert float(rows(out)[0]["value"]) == 1.0


def test_table1_columns():
    code, out, _ = call("table1")
    assert code == 0
    r = rows(out)
    assert list(r[0]) == ["s", "E_H1_paper", "E_H1_computed", "E_H2_paper", "E_H2_computed", "abs_dev"]
    assert [int(x["s"]) for x in r] == list(range(6))
    assert float(r[1]["E_H2_paper"]) == 1.822625


def test_watermelon_constant_command():
    code, out, _ = call("--format", "json", "fulmek")
    d = json.loads(out)[0]
    assert d["c2_published"] == 2.57758
    assert abs(d["c2_computed"] - 2.57758) < 1e-5


def test_json_csv_round_trip_at_17_digits():
    args = ("moments", "--n", "2", "--s", "0.5,1,3.7")
    _, c, _ = call("--precision", "17", *args)
    _, j, _ = call("--precision", "17", "--format", "json", *args)
    cv = [float(r["value"]) for r in rows(c)]
    jv = [r["value"] for r in json.loads(j)]
    assert cv == jv


def test_byte_identical_reruns():
    args = ("--seed", "9", "walk", "sample", "--walkers", "2", "--n", "8", "--samples", "3000")
    assert call(*args)[1] == call(*args)[1]


def test_policy_flags_thread_through():
    code, _, err = call("--max-terms", "2", "--tol", "1e-30", "theta", "--u", "0.01")
    assert code == 0
    code, _, err = call("--max-terms", "1", "--tol", "1e-30", "xi", "--s", "3")
    assert code == 1
    assert json.loads(err)["kind"] == "truncation"


def test_domain_error_exit_and_payload():
    code, out, err = call("cdf", "--n", "1", "--h", "-1")
    assert code == 1 and out == ""
    payload = json.loads(err)
    assert payload["kind"] == "domain"
    assert set(payload) == {"kind", "message", "context"}


def test_usage_errors():
    assert call("nonsense")[0] == 2
    assert call("moments", "--n", "3", "--s", "1")[0] == 2
    assert call("moments", "--n", "1", "--s", "x")[0] == 2
    assert call("--precision", "20", "table1")[0] == 1


@pytest.mark.parametrize(
    "argv",
    [
        ("theta", "--u", "0.5,2", "--order", "1"),
        ("xi", "--s", "0.5,2"),
        ("zseries", "--alpha", "2", "--beta", "0", "--gamma", "3"),
        ("zseries", "--a", "3", "--b", "1", "--method", "direct"),
        ("cdf", "--n", "2", "--h", "1.5"),
        ("density", "--n", "1", "--h", "1.5"),
        ("kmcheck", "--h", "2", "--eps", "0.01"),
        ("walk", "enumerate", "--walkers", "1", "--n", "6"),
        ("walk", "scaling", "--walkers", "1", "--n", "10,20", "--s", "1"),
    ],
)
def test_subcommands_succeed(argv):
    code, out, err = call(*argv)
    assert code == 0, err
    assert len(rows(out)) >= 1


def test_kmcheck_residual():
    _, out, _ = call("--format", "json", "kmcheck", "--h", "2")
    assert json.loads(out)[0]["residual"] <= 1e-4


def test_walk_enumerate_counts():
    _, out, _ = call("walk", "enumerate", "--walkers", "2", "--n", "2")
    r = rows(out)
    assert [(int(x["height"]), int(x["count"])) for x in r] == [(3, 1), (4, 2)]


def test_output_file(tmp_path):
    target = tmp_path / "t.csv"
    code, out, _ = call("--output", str(target), "xi", "--s", "1")
    assert code == 0 and out == ""
    assert rows(target.read_text())[0]["value"] == "0.5"


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "bridgeheights", "moments", "--n", "2", "--s", "0"],
        capture_output=True, text=True, check=True,
    )
    assert float(rows(res.stdout)[0]["value"]) == pytest.approx(1.0, abs=1e-10)
