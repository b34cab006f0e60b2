import json

import pytest

from app.core.config import settings
from app.main import main

IDENTICAL = {"weights": [1, 1], "profile": {"kind": "identical", "values": [1, 1, 2]}}
FRACTIONAL = {"weights": [1, 1], "profile": {"kind": "additive", "matrix": [["1/2", 1], [1, 1]]}}


@pytest.fixture
def identical_file(write_json):
    return write_json("identical.json", IDENTICAL)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_reports_the_optimum(capsys, identical_file):
    code, out, _ = run(capsys, "solve", identical_file)
    assert code == 0
    report = json.loads(out)
    assert report["method"] == "kary"
    assert report["zero_welfare"] is False
    assert report["welfare"]["value"] == pytest.approx(2.0)
    assert sorted(report["utilities"]) == ["2", "2"]


def test_solve_then_check(capsys, tmp_path, identical_file):
    report_path = str(tmp_path / "report.json")
    assert run(capsys, "solve", identical_file, "--method", "oracle", "--out", report_path)[0] == 0
    code, out, _ = run(capsys, "check", identical_file, report_path)
    assert code == 0
    check = json.loads(out)
    assert check["welfare"]["value"] == pytest.approx(2.0)
    assert check["entitlement_ratios"] == check["utilities"]


def test_repair_and_transfer_log(capsys, tmp_path, write_json):
    path = write_json("skewed.json", {"weights": [1, 3], "profile": {"kind": "identical", "values": [5, 1, 1, 1]}})
    log_path = tmp_path / "transfers.jsonl"
    code, out, _ = run(capsys, "solve", path, "--repair", "--transfer-log", str(log_path))
    assert code == 0
    report = json.loads(out)
    assert report["wwef1"] is True
    assert report["violations"] == []
    lines = log_path.read_text().splitlines()
    assert len(lines) == len(report["transfers"])
    for line in lines:
        assert set(json.loads(line)) == {"round", "from", "to", "good"}


def test_egalitarian_p_mean(capsys, write_json):
    path = write_json("pmean.json", {"weights": [1, 1], "profile": {"kind": "identical", "values": [1, 1, 3, 2]}})
    code, out, _ = run(capsys, "solve", path, "--method", "pmean", "--p=-inf")
    assert code == 0
    assert json.loads(out)["parameters"]["p"] == "-inf"


@pytest.mark.parametrize("p", ["1", "-1", "-inf"])
def test_p_mean_report_rechecks_to_the_same_welfare(capsys, tmp_path, write_json, p):
    path = write_json("pmean.json", {"weights": [1, 1, 1], "profile": {"kind": "identical", "values": [1, 1, 6]}})
    report_path = str(tmp_path / "report.json")
    assert run(capsys, "solve", path, "--method", "pmean", f"--p={p}", "--out", report_path)[0] == 0
    solved = json.loads((tmp_path / "report.json").read_text())
    code, out, _ = run(capsys, "check", path, report_path)
    assert code == 0
    checked = json.loads(out)
    assert checked["p"] == solved["parameters"]["p"]
    assert checked["welfare"]["is_zero"] == solved["welfare"]["is_zero"]
    assert checked["welfare"]["value"] == pytest.approx(solved["welfare"]["value"])


def test_check_p_flag_overrides_the_report(capsys, tmp_path, write_json):
    path = write_json("pmean.json", {"weights": [1, 1], "profile": {"kind": "identical", "values": [1, 1, 6]}})
    allocation = write_json("allocation.json", {"bundles": [[0, 1, 2], []]})
    code, out, _ = run(capsys, "check", path, allocation)
    assert code == 0
    assert json.loads(out)["welfare"]["is_zero"] is True
    code, out, _ = run(capsys, "check", path, allocation, "--p", "1")
    assert code == 0
    assert json.loads(out)["welfare"]["value"] == pytest.approx(4.0)


@pytest.mark.parametrize(
    "argv, expected",
    [
        (["solve", "{fractional}", "--method", "fptas"], 4),
        (["solve", "{identical}", "--method", "fptas", "--p", "1"], 2),
        (["solve", "{identical}", "--p", "abc"], 2),
        (["solve", "{identical}", "--method", "simplex"], 2),
        (["solve", "{identical}", "--method", "oracle", "--budget", "1"], 3),
        (["solve", "{missing}"], 2),
        (["check", "{identical}", "{fractional}"], 2),
    ],
)
def test_exit_codes(capsys, tmp_path, write_json, identical_file, argv, expected):
    paths = {
        "identical": identical_file,
        "fractional": write_json("fractional.json", FRACTIONAL),
        "missing": str(tmp_path / "missing.json"),
    }
    code, _, err = run(capsys, *[arg.format(**paths) for arg in argv])
    assert code == expected
    assert "error: " in err


def test_fptas_needs_integers(capsys, write_json):
    path = write_json("fractional.json", FRACTIONAL)
    code, _, err = run(capsys, "solve", path, "--method", "fptas")
    assert code == 4
    assert "integer valuations required" in err


def test_budget_override_is_restored(capsys, identical_file):
    before = settings.SOLVER_BUDGET, settings.ORACLE_MAX_ALLOCATIONS
    run(capsys, "solve", identical_file, "--method", "oracle", "--budget", "1")
    assert (settings.SOLVER_BUDGET, settings.ORACLE_MAX_ALLOCATIONS) == before


def test_gen_is_deterministic(capsys):
    argv = ["gen", "two_valuable", "--n", "3", "--m", "4", "--seed", "5"]
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first[0] == 0
    assert first[1] == second[1]
    assert json.loads(first[1])["profile"]["kind"] == "two_valuable"


def test_gen_output_solves(capsys, tmp_path):
    out = str(tmp_path / "gen.json")
    assert run(capsys, "gen", "kary", "--n", "2", "--m", "5", "--out", out)[0] == 0
    code, stdout, _ = run(capsys, "solve", out)
    assert code == 0
    assert json.loads(stdout)["method"] == "kary"


def test_classify(capsys, identical_file):
    code, out, _ = run(capsys, "classify", identical_file)
    assert code == 0
    traits = json.loads(out)
    assert traits["identical"] is True
    assert traits["k_ary"] == 2


def test_bench(capsys, tmp_path, write_json):
    write_json("identical.json", IDENTICAL)
    suite = write_json("suite.json", {"cases": [{"instance": "identical.json", "methods": ["kary"]}]})
    code, out, _ = run(capsys, "bench", suite, "--workers", "1")
    assert code == 0
    header, row = out.strip().splitlines()
    assert header.startswith("instance,method,params")
    assert row.startswith("identical.json,kary,")
