from __future__ import annotations

import json

import pytest

from minispec.cli import run_cli
from minispec.corpus import ROOT
from minispec.thermo import adc_code

CBIT, ACQ, ADC = (str(ROOT / f) for f in ("cbit.mc", "acq.mc", "adc.mc"))
FILES = [CBIT, ACQ, ADC]
DOMAINS = str(ROOT / "domains.json")
SETTER = ["--function", "cbit_set_work_cond"]


def test_check_empty_file(tmp_path, capsys):
    empty = tmp_path / "e.mc"
    empty.write_text("")
    assert run_cli(["check", str(empty)]) == 0
    assert "0 functions" in capsys.readouterr().out


def test_check_corpus(capsys):
    assert run_cli(["check", *FILES]) == 0
    out = capsys.readouterr().out
    assert "cbit_set_work_cond" in out


def test_check_parse_error_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.mc"
    bad.write_text("module b;\nvoid f( {\n")
    assert run_cli(["check", str(bad)]) == 2
    assert "bad.mc:2" in capsys.readouterr().err


def test_check_resolve_error_exits_one(tmp_path):
    bad = tmp_path / "bad.mc"
    bad.write_text("module b;\nvoid f(void) { x = 1; }\n")
    assert run_cli(["check", str(bad)]) == 1


def test_missing_file_exits_two(capsys):
    assert run_cli(["check", "/nonexistent.mc"]) == 2
    assert capsys.readouterr().err


def test_usage_error_exits_two():
    assert run_cli(["verify", CBIT]) == 2          # --domains is required
    assert run_cli(["frobnicate"]) == 2


def test_verify_setter_exits_zero(capsys):
    assert run_cli(["verify", *FILES, "--domains", DOMAINS, *SETTER]) == 0
    assert "6" in capsys.readouterr().out


def test_verify_uncorrected_exits_one(capsys):
    files = [str(ROOT / "variants" / "cbit_uncorrected.mc"), ACQ, ADC]
    rc = run_cli(["verify", *files, "--domains", DOMAINS,
                  "--function", "cbit_check_temperature"])
    assert rc == 1
    assert "Failed" in capsys.readouterr().out


def test_strict_treats_timeout_as_failure(capsys):
    args = ["verify", *FILES, "--domains", DOMAINS, *SETTER, "--max-states", "10"]
    assert run_cli(args) == 0
    assert run_cli(args + ["--strict"]) == 1


def test_verify_json_and_report_round_trip(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run_cli(["verify", *FILES, "--domains", DOMAINS, *SETTER,
                    "--format", "json", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    [row] = data["functions"]
    assert (row["scheduled"], row["valid"]) == (6, 6)
    capsys.readouterr()
    assert run_cli(["report", str(out)]) == 0
    assert "cbit_set_work_cond" in capsys.readouterr().out
    again = tmp_path / "again.json"
    assert run_cli(["report", str(out), "--format", "json", "--out", str(again)]) == 0
    assert again.read_text() == out.read_text()


def test_scenario_command(capsys):
    scen = str(ROOT / "scenarios" / "cold_latch.json")
    assert run_cli(["scenario", *FILES, "--domains", DOMAINS, "--scenario", scen]) == 0


def test_table_csv(capsys):
    assert run_cli(["table", "--t-min", "0", "--t-max", "10", "--n", "4"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "temperature,code"
    assert lines[1:] == [f"{t},{adc_code(t)}" for t in (0, 3, 6, 10)]


@pytest.mark.parametrize("args", [["--n", "1"], ["--t-min", "5", "--t-max", "5"]])
def test_table_bad_range_exits_two(args):
    assert run_cli(["table", *args]) == 2
