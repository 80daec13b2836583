"""Config parsing, subcommand output, exit statuses, and CSV/JSON contracts."""

import contextlib
import io
import json
import math
import re

import pytest

from ffscap.cli import (
    ConfigError,
    ScenarioConfig,
    parse_config,
    render_config,
    run_cli,
)
from ffscap.model import ConstraintError
from ffscap.oracle import OracleReport


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = run_cli(list(argv))
    return code, out.getvalue(), err.getvalue()


def fractions_in(text):
    pairs = re.findall(r"^f([12]) = (\d\.\d{4})$", text, flags=re.M)
    return dict(pairs)


# ---------------------------------------------------------------------------
# parse_config / render_config
# ---------------------------------------------------------------------------

def test_empty_document_is_the_baseline_scenario():
    cfg = parse_config("")
    assert cfg == ScenarioConfig()
    assert cfg.alpha == 682000.0
    assert math.isinf(cfg.xi)
    assert cfg.rounds == 1
    assert cfg.p == 1684.0


def test_overrides_comments_and_blank_lines():
    cfg = parse_config(
        "# linear regime\n"
        "\n"
        "alpha = 0\n"
        "rounds = 1   # one shot\n"
        "xi = inf\n"
        "grid_points = 501\n")
    assert cfg.alpha == 0.0
    assert cfg.rounds == 1
    assert math.isinf(cfg.xi)
    assert cfg.grid_points == 501


def test_finite_xi_parses_as_number():
    assert parse_config("xi = 0.05\n").xi == 0.05


def test_unknown_key_names_key_and_line():
    with pytest.raises(ConfigError, match=r"unknown key 'zeta' \(line 3\)"):
        parse_config("# c\nalpha = 1\nzeta = 3\n")


def test_unparsable_value_names_line():
    with pytest.raises(ConfigError, match=r"'alpha' \(line 2\)"):
        parse_config("p = 1684\nalpha = lots\n")
    with pytest.raises(ConfigError, match=r"'rounds' \(line 1\)"):
        parse_config("rounds = 1.5\n")


def test_missing_equals_sign_is_an_error():
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("alpha 682000\n")


def test_invariant_violation_names_the_constraint():
    with pytest.raises(ConstraintError, match="constraint violated: p > 0"):
        parse_config("p = -5\n")
    with pytest.raises(ConstraintError, match="rounds >= 1"):
        parse_config("rounds = 0\n")


def test_render_config_round_trips():
    for cfg in (ScenarioConfig(),
                ScenarioConfig(alpha=0.0, rounds=7, xi=0.2, r_f=123.456789)):
        assert parse_config(render_config(cfg)) == cfg


# ---------------------------------------------------------------------------
# solve / repeat
# ---------------------------------------------------------------------------

def test_solve_prints_four_decimal_fractions():
    code, out, _ = run("solve")
    assert code == 0
    got = fractions_in(out)
    assert got["1"] == "0.9527"
    assert got["2"] == "0.9398"
    assert "regime = interior" in out
    assert re.search(r"^bonus = -\d+\.\d\d$", out, flags=re.M)


def test_solve_json_document_round_trips(tmp_path):
    code, out, _ = run("solve", "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "solve"
    assert len(doc["config"]) == 18
    assert doc["config"]["xi"] == "inf"
    assert isinstance(doc["result"]["f1"], float)
    assert doc["result"]["regime"] == "interior"
    text = "\n".join(f"{k} = {v}" for k, v in doc["config"].items())
    assert parse_config(text) == ScenarioConfig()

    # and through a non-default config file
    custom = tmp_path / "scenario.cfg"
    custom.write_text("alpha = 500000\nxi = 0.2\nrounds = 3\n")
    code, out, _ = run("solve", "--json", "--config", str(custom))
    assert code == 0
    doc = json.loads(out)
    text = "\n".join(f"{k} = {v}" for k, v in doc["config"].items())
    assert parse_config(text) == parse_config(custom.read_text())


def test_solve_and_single_round_repeat_print_identical_fractions():
    _, solve_out, _ = run("solve")
    code, repeat_out, _ = run("repeat", "--rounds", "1")
    assert code == 0
    assert fractions_in(solve_out) == fractions_in(repeat_out)
    assert "round = 1" in repeat_out


def test_repeat_final_line_reports_the_fractions():
    code, out, _ = run("repeat", "--rounds", "5")
    assert code == 0
    final = out.rstrip("\n").splitlines()[-1]
    assert re.fullmatch(r"final: f1 = \d\.\d{4}, f2 = \d\.\d{4}", final)


def test_repeat_writes_trace_csv(tmp_path):
    path = tmp_path / "trace.csv"
    code, _, _ = run("repeat", "--rounds", "3", "--trace", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "round,f1,f2,z,bonus,insurer_cost_reduced,practice_profit_reduced"
    assert len(lines) == 4
    assert lines[1].startswith("1,0.95")
    for line in lines[1:]:
        cells = line.split(",")
        assert len(cells) == 7
        assert all(" " not in cell and "_" not in cell for cell in cells)


# ---------------------------------------------------------------------------
# sweep-alpha / threshold / oracle-check
# ---------------------------------------------------------------------------

def test_sweep_csv_on_stdout():
    code, out, _ = run("sweep-alpha", "--min", "600000", "--max", "650000",
                       "--step", "25000")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "alpha,f1,f2,z,bonus,regime"
    assert len(lines) == 4
    assert lines[1].split(",")[0] == "600000.0"
    assert "." in lines[1].split(",")[1]


def test_sweep_output_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        code, _, _ = run("sweep-alpha", "--min", "650000", "--max", "700000",
                         "--step", "25000", "--out", str(path))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().startswith(b"alpha,f1,f2,z,bonus,regime\n")


def test_threshold_prints_two_decimals():
    code, out, _ = run("threshold")
    assert code == 0
    assert out == "31.80\n"


def test_oracle_check_agrees_at_defaults():
    code, out, _ = run("oracle-check", "--grid", "0.001")
    assert code == 0
    assert "max_deviation = " in out
    assert "oracle_f1 = 0.9527" in out


def test_oracle_check_disagreement_exits_3(monkeypatch):
    import ffscap.cli as cli_mod

    def fake_oracle(params, policy, grid_resolution=1e-4):
        return OracleReport(grid_resolution=grid_resolution,
                            oracle_f1=0.1, oracle_f2=0.9,
                            oracle_objective=0.0,
                            solver_f1=0.9, solver_f2=0.9,
                            max_deviation=0.8)

    monkeypatch.setattr(cli_mod, "oracle_stackelberg", fake_oracle)
    code, out, _ = run("oracle-check")
    assert code == 3
    assert "max_deviation" in out


# ---------------------------------------------------------------------------
# exit statuses
# ---------------------------------------------------------------------------

def test_usage_errors_exit_1():
    for argv in (["bogus"],
                 ["sweep-alpha", "--min", "1"],            # missing required
                 ["repeat", "--rounds", "two"],            # unparsable int
                 []):                                      # no subcommand
        code, _, err = run(*argv)
        assert code == 1, argv
        assert err.startswith("error:")


def test_missing_config_file_exits_1(tmp_path):
    code, _, err = run("solve", "--config", str(tmp_path / "nope.cfg"))
    assert code == 1
    assert "error:" in err


def test_config_errors_map_to_statuses(tmp_path):
    bad_value = tmp_path / "bad_value.cfg"
    bad_value.write_text("alpha = maybe\n")
    code, _, err = run("solve", "--config", str(bad_value))
    assert code == 1 and "line 1" in err

    bad_invariant = tmp_path / "bad_invariant.cfg"
    bad_invariant.write_text("p = -5\n")
    code, _, err = run("solve", "--config", str(bad_invariant))
    assert code == 2
    assert "constraint violated: p > 0" in err


def test_help_exits_0():
    code, _, _ = run("--help")
    assert code == 0


def test_rounds_below_one_is_an_invariant_violation():
    code, _, err = run("repeat", "--rounds", "0")
    assert code == 2
    assert "rounds >= 1" in err
