import csv
import json
import re
import subprocess
import sys

import pytest

from conftest import data_text
from netcomplete.cli import main
from netcomplete.completion import SolveReport, Status


@pytest.fixture
def toy_file(tmp_path):
    path = tmp_path / "toy.lp"
    path.write_text(data_text("toy.lp"))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_complete_hybrid(capsys, toy_file):
    code, out, _ = run(capsys, "complete", toy_file)
    assert code == 0
    assert "Answer 1: size 3" in out
    assert "completion(r6) completion(r7) completion(r9)" in out
    assert "r5\t49999.5" in out


def test_complete_enumerate_union(capsys, toy_file):
    code, out, _ = run(capsys, "complete", toy_file, "--semantics", "topo", "--enumerate", "--union")
    assert code == 0
    assert "Answer 2: size 2" in out
    assert "completion(r6) completion(r7) completion(r8)" in out
    assert "% union verified (hybrid): false" in out


def test_complete_json_round_trip(capsys, toy_file):
    code, out, _ = run(capsys, "complete", toy_file, "--enumerate", "--json")
    assert code == 0
    report = SolveReport.from_dict(json.loads(out))
    assert report.status is Status.OPTIMAL
    assert [c.sorted() for c in report.solutions] == [("r6", "r7", "r9"), ("r6", "r8", "r9")]


def test_no_solution_exits_one(capsys, tmp_path):
    # without r9 nothing drains G, so strict activation is impossible
    text = re.sub(r"\w+\([^)]*\br9\b[^)]*\)\.", "", data_text("toy.lp"))
    path = tmp_path / "broken.lp"
    path.write_text(text)
    code, out, _ = run(capsys, "complete", str(path), "--semantics", "strict")
    assert code == 1


def test_check_and_verify(capsys, toy_file):
    assert run(capsys, "check", toy_file)[0] == 1
    code, out, _ = run(capsys, "check", toy_file, "--completion", "r6,r9")
    assert code == 0 and out.startswith("activated: true")
    assert run(capsys, "check", toy_file, "--semantics", "relaxed", "--completion", "r6")[0] == 0
    assert run(capsys, "verify", toy_file, "--completion", "r6,r7,r9")[0] == 0
    assert run(capsys, "verify", toy_file, "--completion", "r6,r9")[0] == 1
    assert run(capsys, "verify", toy_file, "--semantics", "strict", "--completion", "r6,r9")[0] == 0


def test_scope(capsys, toy_file):
    code, out, _ = run(capsys, "scope", toy_file)
    assert code == 0
    assert out.split() == ["B", "S1", "S2", "S3"]


def test_usage_errors(capsys, toy_file, tmp_path):
    assert run(capsys, "complete", toy_file, "--prop", "150")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    bad = tmp_path / "bad.lp"
    bad.write_text("reaction(r1\n")
    code, _, err = run(capsys, "complete", str(bad))
    assert code == 2 and "error" in err
    assert run(capsys, "complete", str(tmp_path / "missing.lp"))[0] == 2
    assert run(capsys, "verify", toy_file, "--completion", "r1")[0] == 2


def test_help(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0 and "complete" in out


def test_degrade_then_complete(capsys, tmp_path):
    out_file = tmp_path / "deg.lp"
    code, _, _ = run(capsys, "degrade", "--reactions", "60", "--seed", "3", "-o", str(out_file))
    assert code == 0
    code, out, _ = run(capsys, "complete", str(out_file), "--time-limit", "30")
    assert code == 0 and "Answer 1" in out


def test_degrade_existing_instance(capsys, toy_file):
    # the toy draft never had flux, so one removal is enough
    code, out, _ = run(capsys, "degrade", toy_file, "--fraction", "0.1", "--seed", "1")
    assert code == 0 and "reaction(" in out


def test_bench(capsys, toy_file, tmp_path):
    csv_file = tmp_path / "rows.csv"
    code, out, _ = run(capsys, "bench", toy_file, "--semantics", "topo,hybrid", "--csv", str(csv_file))
    assert code == 0 and "hybrid" in out
    rows = list(csv.DictReader(csv_file.open()))
    assert [r["optimum_size"] for r in rows] == ["2", "3"]


def test_module_entry_point(toy_file):
    proc = subprocess.run(
        [sys.executable, "-m", "netcomplete", "complete", toy_file, "--semantics", "relaxed"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert "completion(r6)" in proc.stdout
