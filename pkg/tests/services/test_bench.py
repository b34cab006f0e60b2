import io

import pytest

from app.core.errors import InstanceParseError
from app.schemas.result import BenchCase, BenchSuite
from app.services.bench import CSV_COLUMNS, load_suite, run_suite, write_csv

INSTANCE = {"weights": [1, 2], "profile": {"kind": "identical", "values": [3, 1, 2, 2]}}


def test_empty_suite_writes_only_the_header():
    buffer = io.StringIO()
    write_csv(run_suite(BenchSuite()), buffer)
    assert buffer.getvalue() == ",".join(CSV_COLUMNS) + "\n"


def test_exact_method_has_unit_ratio(tmp_path, write_json):
    write_json("small.json", INSTANCE)
    suite = BenchSuite(cases=[BenchCase(instance="small.json", methods=["kary", "oracle"])])
    rows = run_suite(suite, base=tmp_path, workers=2)
    assert [row.method for row in rows] == ["kary", "oracle"]
    assert all(row.ratio == "1" for row in rows)
    assert all(row.welfare_log == row.oracle_log for row in rows)


def test_failures_are_reported_per_row(tmp_path, write_json):
    write_json("small.json", INSTANCE)
    suite = BenchSuite(cases=[
        BenchCase(instance="small.json", methods=["two_valuable", "kary"]),
        BenchCase(instance="missing.json", methods=["kary"]),
    ])
    rows = run_suite(suite, base=tmp_path)
    assert [row.welfare_log for row in rows][0] == "failed"
    assert rows[1].welfare_log not in ("failed", "")
    assert rows[2].welfare_log == "failed"


@pytest.mark.parametrize("params", [{"epsilon": "0.5x"}, {"p": "abc"}, {"lambda": "x"}, {"epsilon": 2}, {"epsilon": 0.5, "delta": 1}])
def test_bad_parameters_fail_only_their_row(tmp_path, write_json, params):
    write_json("small.json", INSTANCE)
    suite = BenchSuite(cases=[
        BenchCase(instance="small.json", methods=["ptas"], params=params),
        BenchCase(instance="small.json", methods=["kary"]),
    ])
    rows = run_suite(suite, base=tmp_path)
    assert rows[0].welfare_log == "failed"
    assert rows[1].ratio == "1"


def test_p_mean_row_accepts_negative_infinity(tmp_path, write_json):
    write_json("equal.json", {"weights": [1, 1], "profile": {"kind": "identical", "values": [1, 1, 3, 2]}})
    suite = BenchSuite(cases=[BenchCase(instance="equal.json", methods=["oracle"], params={"p": "-inf"})])
    [row] = run_suite(suite, base=tmp_path)
    assert row.ratio == "1"

def test_repair_counts_transfers(tmp_path, write_json):
    write_json("small.json", INSTANCE)
    suite = BenchSuite(cases=[
        BenchCase(instance="small.json", methods=["ptas"], params={"epsilon": 0.8}, repair=True)
    ])
    [row] = run_suite(suite, base=tmp_path)
    assert row.transfers.isdigit()
    assert '"epsilon": 0.8' in row.params


def test_load_suite(write_json):
    path = write_json("suite.json", {"cases": [{"instance": "a.json", "methods": ["auto"]}]})
    suite = load_suite(path)
    assert suite.cases[0].methods == ["auto"]
    assert suite.cases[0].repair is False
    with pytest.raises(InstanceParseError):
        load_suite(write_json("bad.json", {"cases": [{"methods": ["auto"]}]}))
