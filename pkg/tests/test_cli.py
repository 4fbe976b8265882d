import json

import pytest

from cartan_kit import cli
from cartan_kit import scenarios as S


def _run(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_scenarios(capsys):
    code, out, _ = _run(capsys, ["list-scenarios"])
    assert code == 0
    assert [line.split("\t")[0] for line in out.strip().splitlines()] == list(S.SCENARIOS)


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--scenario", "torus-frame", "--samples", "0"],
        ["verify", "--scenario", "nowhere"],
        ["verify", "--scenario", "torus-frame", "--tol", "no_such_tol=1e-3"],
        ["verify", "--scenario", "torus-frame", "--tol", "equivariance"],
        ["verify", "--scenario", "torus-frame", "--tol", "equivariance=abc"],
        ["verify", "--scenario", "sphere-homogeneous", "--inject", "indefinite-metric"],
        ["obstruction", "--scenario", "torus-frame"],
    ],
)
def test_config_errors_exit_2(capsys, argv):
    code, out, err = _run(capsys, argv)
    assert code == 2 and out == "" and err.startswith("cartan-kit:")


def test_unwritable_output_exits_2(capsys, tmp_path):
    code, _, err = _run(capsys, ["verify", "--scenario", "torus-frame", "--samples", "4", "--out", str(tmp_path / "missing" / "r.json")])
    assert code == 2 and "cannot write" in err


def test_verify_passes_and_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["verify", "--scenario", "torus-frame", "--samples", "20", "--seed", "3"]
    assert _run(capsys, args + ["--out", str(a)])[0] == 0
    code, out, err = _run(capsys, args + ["--out", str(b), "--timing"])
    assert code == 0 and out == ""
    assert "torus-frame: PASS in" in err
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(a.read_text())
    assert data["scenario"] == "torus-frame" and data["overall_pass"] is True
    assert "runtime" not in json.dumps(data)


def test_report_on_stdout(capsys):
    code, out, _ = _run(capsys, ["verify", "--scenario", "sphere-frame", "--samples", "10"])
    assert code == 0
    assert {r["stage"] for r in json.loads(out)["records"]} >= {"bundle", "connection", "(v)=>(iv)", "curvature"}


def test_injected_fault_exits_1(capsys):
    code, out, err = _run(capsys, ["verify", "--scenario", "sphere-frame", "--samples", "10", "--inject", "broken-cocycle"])
    assert code == 1 and "FAIL" in err
    data = json.loads(out)
    assert data["extras"]["rejected_at_stage"] == "bundle"


def test_tolerance_override_can_fail_a_run(capsys):
    # the flat torus passes by default; an absurd soldering threshold must reject it
    code, out, _ = _run(capsys, ["verify", "--scenario", "torus-frame", "--samples", "10", "--tol", "surjectivity=100"])
    assert code == 1
    assert json.loads(out)["extras"]["rejected_at_stage"] == "connection"


def test_profile_selection(capsys):
    assert _run(capsys, ["verify", "--scenario", "torus-frame", "--samples", "4", "--profile", "nope"])[0] == 2
    code, out, _ = _run(capsys, ["verify", "--scenario", "torus-frame", "--samples", "4", "--profile", "loose"])
    assert code == 0
    eq = [r for r in json.loads(out)["records"] if r["name"].startswith("connection equivariance")]
    assert eq and all(r["threshold"] == 1e-4 for r in eq)
