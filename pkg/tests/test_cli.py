"""
Tests for the command line: exit codes, report output, error messages
"""

import json
from pathlib import Path

import pytest
import yaml
from click.testing import CliRunner

from vertexforge.application.dto import COMMANDS, PAYLOADS
from vertexforge.infrastructure.loader import load_scenario
from vertexforge.presentation.cli import main

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

GEOMETRIC = {
    "command": "expand",
    "payload": {"expr": "1/(1 - x)", "domain": "x@0", "window": [0, 3], "expect": [1, 1, 1, 1]},
}
WRONG = {
    "command": "expand",
    "payload": {"expr": "1/(1 - x)", "domain": "x@0", "window": [0, 3], "expect": [1, 2, 1, 1]},
}
BROKEN = {"command": "expand", "payload": {"expr": "x", "domain": "x@0", "window": [0, 1], "colour": "red"}}


@pytest.fixture
def runner():
    return CliRunner()


def lines_of(text):
    return [json.loads(line) for line in text.splitlines()]


# ============================================
# EXIT CODES
# ============================================

def test_passing_scenario(runner, write_scenario):
    result = runner.invoke(main, ["run", str(write_scenario(GEOMETRIC))])
    assert result.exit_code == 0
    (line,) = lines_of(result.stdout)
    assert line["verdict"] == "pass"
    assert line["coefficients"] == ["1", "1", "1", "1"]


def test_failing_check(runner, write_scenario):
    result = runner.invoke(main, ["run", str(write_scenario(WRONG))])
    assert result.exit_code == 1
    assert lines_of(result.stdout)[0]["witness"] == {"x": 1}


def test_schema_error(runner, write_scenario):
    path = write_scenario(BROKEN)
    result = runner.invoke(main, ["run", str(path)])
    assert result.exit_code == 2
    assert result.stderr.startswith(f"{path}: /payload/colour: ")
    assert result.stdout == ""


def test_malformed_json(runner, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    result = runner.invoke(main, ["run", str(path)])
    assert result.exit_code == 2
    assert "not well-formed" in result.stderr


def test_schema_error_does_not_stop_other_files(runner, write_scenario):
    good = write_scenario(GEOMETRIC, "good.json")
    bad = write_scenario(BROKEN, "bad.json")
    result = runner.invoke(main, ["run", str(bad), str(good)])
    assert result.exit_code == 2
    assert len(lines_of(result.stdout)) == 1


def test_missing_file(runner, tmp_path):
    result = runner.invoke(main, ["run", str(tmp_path / "absent.json")])
    assert result.exit_code == 2


# ============================================
# OUTPUT
# ============================================

def test_out_file(runner, write_scenario, tmp_path):
    out = tmp_path / "report.jsonl"
    result = runner.invoke(main, ["run", str(write_scenario(GEOMETRIC)), "--out", str(out)])
    assert result.exit_code == 0
    assert result.stdout == ""
    assert lines_of(out.read_text(encoding="utf-8"))[0]["identity"] == "expand"


def test_report_is_byte_identical(runner, write_scenario):
    path = str(write_scenario(GEOMETRIC))
    first = runner.invoke(main, ["run", path]).stdout
    second = runner.invoke(main, ["run", path]).stdout
    assert first == second


def test_keys_are_sorted(runner, write_scenario):
    result = runner.invoke(main, ["run", str(write_scenario(GEOMETRIC))])
    (text,) = result.stdout.splitlines()
    keys = list(json.loads(text))
    assert keys == sorted(keys)


def test_yaml_scenario(runner, tmp_path):
    path = tmp_path / "geometric.yaml"
    path.write_text(yaml.safe_dump(GEOMETRIC), encoding="utf-8")
    result = runner.invoke(main, ["run", str(path)])
    assert result.exit_code == 0


def test_max_cells_option(runner, write_scenario):
    scenario = {"command": "zf-build", "payload": {"preset": "betagamma", "maxdeg": 3}}
    result = runner.invoke(main, ["run", str(write_scenario(scenario)), "--max-cells", "5"])
    assert result.exit_code == 1
    (line,) = lines_of(result.stdout)
    assert line["kind"] == "resource"


def test_commands_listing(runner):
    result = runner.invoke(main, ["commands"])
    assert result.exit_code == 0
    assert result.stdout.split() == list(COMMANDS)


# ============================================
# SHIPPED SCENARIOS
# ============================================

@pytest.mark.parametrize("path", sorted(SCENARIOS.rglob("*.json")), ids=lambda p: p.name)
def test_shipped_scenarios_validate(path):
    """Every payload matches its command schema; expressions are parsed later"""
    scenario = load_scenario(path)
    PAYLOADS[scenario.command].model_validate(scenario.payload)


@pytest.mark.parametrize("name", ["expand_geometric.json", "qyb_identity.json", "delta_three_term.json"])
def test_quick_scenarios_pass(runner, name):
    result = runner.invoke(main, ["run", str(SCENARIOS / name)])
    assert result.exit_code == 0


def test_unbalanced_parenthesis(runner):
    result = runner.invoke(main, ["run", str(SCENARIOS / "negative" / "expand_unbalanced.json")])
    assert result.exit_code == 2
    assert "/payload/expr" in result.stderr


def test_negative_control_fails(runner):
    result = runner.invoke(main, ["run", str(SCENARIOS / "negative" / "qyb_perturbed.json")])
    assert result.exit_code == 1
    (line,) = lines_of(result.stdout)
    assert line["scenario"] == "perturbed diagonal, unitarity must fail"


@pytest.mark.parametrize("name", ["zf_betagamma.json", "zf_q_system.json", "zn_rank_half_currents.json"])
def test_module_scenarios_pass(runner, name):
    result = runner.invoke(main, ["run", str(SCENARIOS / name)])
    assert result.exit_code == 0
    assert all("kind" not in line for line in lines_of(result.stdout))
