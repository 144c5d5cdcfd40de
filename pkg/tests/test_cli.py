import csv
import io
import json

import pytest

from barelay.cli import (
    CSV_COLUMNS,
    EXIT_CONFIG,
    EXIT_DELAY,
    EXIT_OK,
    ExperimentConfig,
    emit,
    main,
    make_row,
    parse_config,
    parse_grid,
)
from barelay.errors import ConfigError

BASE = ["--scheme", "fixed-optimal", "--ps", "0.5", "--pr", "0.5", "--s0", "2", "--r0", "2"]


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_analyze_example():
    cfg = parse_config(["analyze", *BASE])
    assert cfg.mode == "analyze"
    assert (cfg.scheme, cfg.ps, cfg.pr, cfg.s0, cfg.r0) == ("fixed-optimal", 0.5, 0.5, 2.0, 2.0)


def test_missing_s0_is_named():
    with pytest.raises(ConfigError) as err:
        parse_config(["analyze", "--scheme", "fixed-optimal", "--ps", "0.5", "--pr", "0.5"])
    assert any("--s0" in p for p in err.value.problems)


def test_overspecified_outage_conflicts():
    with pytest.raises(ConfigError) as err:
        parse_config(["analyze", *BASE, "--gamma-db", "30"])
    assert any("conflict" in p for p in err.value.problems)


def test_all_problems_reported():
    with pytest.raises(ConfigError) as err:
        parse_config(["analyze", "--scheme", "fixed-delay-v1", "--slots", "0"])
    assert len(err.value.problems) >= 3


def test_unknown_flag_and_figure(capsys):
    assert main(["analyze", *BASE, "--bogus", "1"]) == EXIT_CONFIG
    assert main(["reproduce", "fig99"]) == EXIT_CONFIG
    assert "fig99" in capsys.readouterr().err


def test_config_round_trip(tmp_path, capsys):
    argv = ["sweep", *BASE, "--axis", "rates", "--values", "1,2,3", "--slots", "1000", "--seed", "9"]
    cfg = parse_config(argv)
    path = tmp_path / "cfg.json"
    assert main([*argv, "--print-config"]) == EXIT_OK
    path.write_text(capsys.readouterr().out)
    assert parse_config(["sweep", "--config", str(path)]) == cfg
    assert ExperimentConfig.from_dict(json.loads(cfg.to_json())) == cfg
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"mode": "analyze", "nope": 1})


def test_parse_grid():
    assert parse_grid("0:10:5") == (0.0, 5.0, 10.0)
    assert parse_grid("1, 2.5") == (1.0, 2.5)
    with pytest.raises(ConfigError):
        parse_grid("1:2:0")


def test_emit_empty_is_header_only(tmp_path):
    out = tmp_path / "t.csv"
    text = emit([], "csv", str(out))
    assert text == ",".join(CSV_COLUMNS) + "\n"
    assert out.read_text() == text


def test_emit_bit_stable(tmp_path):
    rows = [make_row(10.0, "mixed", {"ps": 0.1, "throughput": 1 / 3}, {"throughput": 0.33, "outage": None}, 7, 100)]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit(rows, "csv", str(a))
    emit(rows, "csv", str(b))
    assert a.read_bytes() == b.read_bytes()
    rec = read_csv(a.read_text())[0]
    assert rec["throughput_analytic"] == repr(1 / 3)
    assert rec["outage_sim"] == "" and rec["pr"] == ""


def test_emit_json_nested_blocks():
    rows = [make_row(0.0, "conv2-fixed", {"throughput": 0.5, "delay": float("inf")}, None)]
    rec = json.loads(emit(rows, "json"))[0]
    assert rec["analytic"]["throughput"] == 0.5
    assert rec["analytic"]["delay"] == "inf"
    assert rec["simulated"] is None


def test_analyze_output(capsys):
    assert main(["analyze", *BASE]) == EXIT_OK
    rec = read_csv(capsys.readouterr().out)[0]
    assert float(rec["throughput_analytic"]) == pytest.approx(0.75)
    assert rec["throughput_sim"] == ""


def test_simulate_output(capsys):
    assert main(["simulate", *BASE, "--slots", "200000", "--seed", "3", "--format", "json"]) == EXIT_OK
    rec = json.loads(capsys.readouterr().out)[0]
    assert rec["simulated"]["throughput"] == pytest.approx(0.75, rel=2e-2)
    assert rec["seed"] == 3 and rec["n_slots"] == 200000


def test_unachievable_delay_exit_code(capsys):
    argv = ["analyze", "--scheme", "fixed-delay-v1", "--ps", "0.3", "--pr", "0.4", "--s0", "2", "--r0", "2", "--target-delay", "1.5"]
    assert main(argv) == EXIT_DELAY
    assert "V1" in capsys.readouterr().err


def test_sweep_no_sim(capsys):
    assert main(["sweep", "--scheme", "fixed-optimal", "--s0", "2", "--r0", "2", "--axis", "gamma_db", "--values", "0:20:10", "--no-sim"]) == EXIT_OK
    rows = read_csv(capsys.readouterr().out)
    assert [r["gamma_db"] for r in rows] == ["0.0", "10.0", "20.0"]
    taus = [float(r["throughput_analytic"]) for r in rows]
    assert taus == sorted(taus)


def test_reproduce_analytic_only(tmp_path):
    out = tmp_path / "fig2.csv"
    assert main(["reproduce", "fig2", "--gammas", "30,40", "--no-sim", "--out", str(out)]) == EXIT_OK
    rows = read_csv(out.read_text())
    schemes = {r["scheme"] for r in rows}
    assert any(s.startswith("fixed-optimal") for s in schemes)
    assert any(s.startswith("conv1-fixed") for s in schemes)
    assert all(r["outage_sim"] == "" for r in rows)
