"""CLI subcommands: formats, overrides, exit codes."""

from __future__ import annotations

import json

import pytest

from ctrlgame.cli import main
from ctrlgame.data import firebird_path, firebird_source
from ctrlgame.dsl import parse_model
from ctrlgame.jsonio import to_json

FIREBIRD = str(firebird_path())


def run(capsys, *argv: str):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def broken_model(tmp_path):
    path = tmp_path / "broken.scm"
    path.write_text(firebird_source().replace("cost 5", "cost -5"))
    return str(path)


class TestValidate:
    def test_clean_model(self, capsys):
        code, out, err = run(capsys, "validate", FIREBIRD)
        assert code == 0
        assert "model OK" in out

    def test_broken_model_exits_1_with_located_diagnostics(self, capsys, broken_model):
        code, out, err = run(capsys, "validate", broken_model)
        assert code == 1
        assert "negative-cost" in err
        assert "$.controls[0].cost" in err

    def test_json_format_reports_diagnostics(self, capsys, broken_model):
        code, out, err = run(capsys, "validate", broken_model, "--format", "json")
        assert code == 1
        payload = json.loads(out)
        assert payload["ok"] is False
        assert payload["diagnostics"][0]["code"] == "negative-cost"


class TestExpand:
    def test_table_contains_costs_and_validity(self, capsys):
        code, out, _ = run(capsys, "expand", FIREBIRD)
        assert code == 0
        lines = [l for l in out.splitlines() if l.startswith("Combo")]
        costs = [l.split()[-2] for l in lines]
        assert costs == ["5", "9", "8", "14", "12", "18"]
        assert [l.split()[-1] for l in lines] == ["yes"] * 5 + ["no"]

    def test_budget_override(self, capsys):
        code, out, _ = run(capsys, "expand", FIREBIRD, "--budget", "20", "--format", "json")
        payload = json.loads(out)
        assert all(row["valid"] for row in payload["rows"])

    def test_csv_format(self, capsys):
        code, out, _ = run(capsys, "expand", FIREBIRD, "--format", "csv")
        assert out.splitlines()[0] == "ID,Combination,Cost,Valid"
        assert "Combo 6,SI-10 AC-3 AC-4 AC-6,18.0,no" in out


class TestMatrix:
    def test_json_values(self, capsys):
        code, out, _ = run(capsys, "matrix", FIREBIRD, "--format", "json")
        payload = json.loads(out)
        assert payload["columns"][0] == "database.C"
        by_id = {row["id"]: row["payoffs"] for row in payload["rows"]}
        assert by_id["Combo 4"][3] == pytest.approx(0.875)
        assert by_id["Combo 4"][4] == pytest.approx(0.968)

    def test_empty_strategy_space_is_an_error(self, capsys):
        code, _, err = run(capsys, "matrix", FIREBIRD, "--budget", "0")
        assert code == 1
        assert "no combination fits the budget" in err


class TestPlay:
    def test_scenario1_json(self, capsys):
        code, out, _ = run(
            capsys, "play", FIREBIRD, "--profile", "scenario1", "--format", "json"
        )
        payload = json.loads(out)
        assert payload["suggested"] == ["SI-10 AC-4 AC-6"]
        assert payload["stages"][0]["best"] == pytest.approx(1.825)

    def test_scenario3_stage_trace(self, capsys):
        code, out, _ = run(capsys, "play", FIREBIRD, "--profile", "scenario3")
        assert code == 0
        assert "Combo 4, Combo 5" in out
        assert "suggested: Combo 4" in out

    def test_unknown_profile(self, capsys):
        code, _, err = run(capsys, "play", FIREBIRD, "--profile", "nope")
        assert code == 1
        assert "unknown profile" in err

    def test_missing_profile_flag_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["play", FIREBIRD])
        assert info.value.code == 2


class TestSweep:
    def test_two_budgets(self, capsys):
        code, out, _ = run(
            capsys,
            "sweep",
            FIREBIRD,
            "--profile",
            "scenario2",
            "--budgets",
            "15,20",
            "--format",
            "json",
        )
        payload = json.loads(out)
        suggested = [e["result"]["suggested"] for e in payload["entries"]]
        assert suggested == [["SI-10 AC-4 AC-6"], ["SI-10 AC-3 AC-4 AC-6"]]

    def test_no_strategy_budget_marked_inline(self, capsys):
        code, out, _ = run(
            capsys, "sweep", FIREBIRD, "--profile", "scenario1",
            "--budgets", "0,15", "--format", "json",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["entries"][0]["error"]["code"] == "no-strategies"
        assert payload["entries"][1]["result"]["suggested"] == ["SI-10 AC-4 AC-6"]

    def test_bad_budget_list(self, capsys):
        code, _, err = run(
            capsys, "sweep", FIREBIRD, "--profile", "scenario1", "--budgets", "a,b"
        )
        assert code == 1
        assert "cannot parse budget list" in err


class TestSensitivity:
    def test_firebird_scan_table(self, capsys):
        code, out, _ = run(
            capsys, "sensitivity", FIREBIRD, "--profile", "scenario1", "--delta", "0.05"
        )
        assert code == 0
        assert "13 stable, 0 unstable" in out

    def test_delta_validation(self, capsys):
        code, _, err = run(
            capsys, "sensitivity", FIREBIRD, "--profile", "scenario1", "--delta", "2"
        )
        assert code == 1
        assert "delta" in err


class TestModelLoading:
    def test_json_model_file(self, capsys, tmp_path):
        path = tmp_path / "firebird.json"
        path.write_text(json.dumps(to_json(parse_model(firebird_source()))))
        code, out, _ = run(capsys, "expand", str(path), "--format", "json")
        assert code == 0
        assert len(json.loads(out)["rows"]) == 6

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "expand", "/nonexistent.scm")
        assert code == 1
        assert "cannot read" in err

    def test_unknown_command_is_usage_error(self):
        with pytest.raises(SystemExit) as info:
            main(["frobnicate"])
        assert info.value.code == 2

    def test_cli_json_equals_http_json(self, capsys):
        # shared render path: the CLI play payload must byte-match the API's
        from fastapi.testclient import TestClient

        from ctrlgame.server import create_app

        spec = parse_model(firebird_source())
        client = TestClient(create_app(spec))
        api = client.post("/api/play", json={"profile": "scenario3"}).json()
        code, out, _ = run(
            capsys, "play", FIREBIRD, "--profile", "scenario3", "--format", "json"
        )
        assert json.loads(out) == api
