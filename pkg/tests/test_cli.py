from __future__ import annotations

import json
import os
from pathlib import Path

import pytest

from gradedjw.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from gradedjw.encoder import RuleTables, override_rules

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize(
    "argv,golden",
    [
        (["table", "--n", "4"], "table_cycle.txt"),
        (["table", "--n", "6"], "table_cycle.txt"),
        (["table", "--n", "3", "--format", "csv"], "table_cycle.csv"),
        (["table", "--lx", "2", "--ly", "2"], "table_torus.txt"),
        (["table", "--lx", "2", "--ly", "2", "--format", "json"], "table_torus.json"),
        (["table", "--lx", "2", "--ly", "2", "--loops", "avoid"], "table_torus_avoid.txt"),
        (["map", "--n", "5", "--bc", "Z", "--ops", str(GOLDEN / "ops_cycle.txt")], "map_cycle.txt"),
    ],
)
def test_golden_output(capsys, argv, golden):
    code, out, _ = run(capsys, *argv)
    assert code == EXIT_OK
    assert out == (GOLDEN / golden).read_text(encoding="utf-8")


def test_json_table_columns(capsys):
    _, out, _ = run(capsys, "table", "--lx", "2", "--ly", "2", "--format", "json")
    rows = json.loads(out)
    assert list(rows[0]) == ["∏Z̃_i", "H. Twist", "V. Twist", "BC", "X_H", "X_V", "H./V. Twist"]
    assert len(rows) == 8


def test_map_json_with_defect(capsys):
    code, out, _ = run(capsys, "map", "--lx", "2", "--ly", "2", "--bc", "ZH", "--defect", "X[0]", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["header"]["spins"][-1] == "d"
    assert len(doc["images"][0]["terms"]) == 1


def test_map_graph_file(capsys, tmp_path):
    path = tmp_path / "theta.json"
    path.write_text(json.dumps({
        "vertices": [0, 1],
        "edges": [{"id": i, "tail": 0, "head": 1} for i in range(3)],
        "vertex_order": {"0": [0, 1, 2], "1": [2, 1, 0]},
    }))
    code, out, _ = run(capsys, "map", "--graph", str(path), "Z[0]", "X[0] X[1]")
    assert code == EXIT_OK
    assert len(out.strip().splitlines()) == 3


def test_verify_passes(capsys, tmp_path):
    report = tmp_path / "report.json"
    code, out, _ = run(capsys, "verify", "--n", "3", "--report", str(report))
    assert code == EXIT_OK
    assert out.strip().endswith("checks passed")
    records = json.loads(report.read_text())
    assert records and all(r["passed"] for r in records)
    assert any(r["certifies"] == "1D sector table row 4" for r in records)


class _CorruptGhz(RuleTables):
    def ghz(self, l_bits, r_bits):
        letter, k = super().ghz(l_bits, r_bits)
        return letter, (k + 2) % 4 if letter == "Z" else k


def test_verify_reports_corrupted_rules(capsys):
    override_rules(_CorruptGhz())
    try:
        code, out, _ = run(capsys, "verify", "--n", "4", "--bc", "Z")
    finally:
        override_rules(None)
    assert code == EXIT_FAIL
    assert "FAIL [cycle(4) bc=Z] intertwiner +1 * X[0] X[1]" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["table", "--n", "4", "--lx", "2", "--ly", "2"],
        ["table", "--lx", "2"],
        ["map", "--n", "4"],
        ["map", "--n", "4", "Q[0]"],
        ["map", "--n", "4", "--bc", "W", "Z[0]"],
        ["map", "--n", "4", "X[0]"],
        ["map", "--graph", "/nonexistent.json", "Z[0]"],
        ["verify", "--n", "5", "--budget", "2"],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_USAGE
    assert err


def test_budget_env_override(capsys, monkeypatch):
    monkeypatch.setenv("GRADEDJW_BUDGET", "2")
    code, _, err = run(capsys, "verify", "--n", "3", "--bc", "I")
    assert code == EXIT_USAGE and "spins" in err


def test_budget_flag_does_not_leak(capsys, monkeypatch):
    monkeypatch.delenv("GRADEDJW_BUDGET", raising=False)
    run(capsys, "verify", "--n", "5", "--budget", "2")
    assert "GRADEDJW_BUDGET" not in os.environ
