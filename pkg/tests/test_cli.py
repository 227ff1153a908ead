import csv
import io
import json
import os

import pytest

from cspmkt import cli
from cspmkt.monopoly import monopoly_equilibrium
from cspmkt.output import CSV_COLUMNS, atomic_write, outcome_from_dict, outcome_to_dict

MONO = {"u0_b": 1.9, "u0_c": 2.1, "b_b": 0.5, "b_c": 0.7, "t_b": 1.1, "t_c": 1.5, "f_b": 0.73, "f_c": 0.75}
DUO = {"alpha_n": 0.7, "alpha_w": 0.6, "beta_n": 0.5, "beta_w": 0.8, "t_b": 1.1, "t_c": 1.2,
       "f_wb": 0.7, "f_nb": 0.73, "f_wc": 0.73, "f_nc": 0.75}
ONESIDED = {"alpha_n": 0.7, "alpha_w": 0.6, "beta_n": 0, "beta_w": 0, "t_b": 0, "t_c": 1.2,
            "f_wb": 0.15, "f_nb": 0.15, "f_wc": 0.3, "f_nc": 0.35}


@pytest.fixture
def write_cfg(tmp_path):
    def _write(doc, name="cfg.json"):
        path = tmp_path / name
        path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return str(path)
    return _write


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_full_monopoly():
    cfg = cli.parse_config(json.dumps({"model": "monopoly", "params": MONO}))
    assert cfg.params.b_c == 0.7 and cfg.model == "monopoly"


def test_parse_empty_lists_missing():
    with pytest.raises(cli.ConfigError) as e:
        cli.parse_config("{}")
    assert "model" in str(e.value) and "params" in str(e.value)


def test_parse_unknown_key():
    with pytest.raises(cli.ConfigError) as e:
        cli.parse_config(json.dumps({"model": "monopoly", "params": MONO, "gamma": 1}))
    assert "gamma" in str(e.value)


def test_parse_missing_param():
    params = dict(MONO)
    del params["t_c"]
    with pytest.raises(cli.ConfigError) as e:
        cli.parse_config(json.dumps({"model": "monopoly", "params": params}))
    assert "t_c" in str(e.value)


def test_parse_constraint_and_sweep():
    cfg = cli.parse_config(json.dumps({
        "model": "constrained", "params": DUO,
        "constraint": {"eta": 0.05, "price_grid": {"min": 0, "max": 2, "step": 0.05}},
        "sweep": {"x": "alpha_plus:0.9:2.7:4", "y": {"key": "alpha_minus", "min": -1, "max": 1, "count": 3}},
    }))
    assert cfg.constraint.eta == 0.05 and cfg.constraint.price_grid.count == 41
    assert cfg.x.count == 4 and cfg.y.key == "alpha_minus"


def test_bad_json_exit_2(write_cfg, capsys):
    code, _, err = run(capsys, "check", "--config", write_cfg("{not json"))
    assert code == 2 and "cli.parse_config" in err


def test_unknown_key_exit_2(write_cfg, capsys):
    code, _, err = run(capsys, "monopoly", "--config", write_cfg({"model": "monopoly", "gamma": 1, "params": MONO}))
    assert code == 2 and "gamma" in err


def test_bad_flag_exit_2(write_cfg, capsys):
    assert run(capsys, "monopoly", "--config", write_cfg({"model": "monopoly", "params": MONO}), "--format", "xml")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_missing_file_exit_2(tmp_path, capsys):
    assert run(capsys, "check", "--config", str(tmp_path / "nope.json"))[0] == 2


def test_check_exit_0_even_on_failure(write_cfg, capsys):
    params = dict(MONO, b_b=1.9)
    code, out, _ = run(capsys, "check", "--config", write_cfg({"model": "monopoly", "params": params}))
    assert code == 0
    rep = {c["id"]: c for c in json.loads(out)}
    assert rep["A1"]["pass"] is False


def test_condition_failure_exit_4(write_cfg, capsys):
    code, _, err = run(capsys, "monopoly", "--config", write_cfg({"model": "monopoly", "params": dict(MONO, b_b=1.9)}))
    assert code == 4 and '"A1"' in err and "monopoly.monopoly_equilibrium" in err
    code, _, err = run(capsys, "duopoly", "--config", write_cfg({"model": "duopoly", "params": dict(DUO, t_b=0.2, t_c=0.2)}))
    assert code == 4 and "B3-proof" in err


def test_solver_failure_exit_3(write_cfg, capsys):
    params = dict(ONESIDED, alpha_n=0.2, alpha_w=2.4, f_wc=0.0, f_nc=0.0)
    code, _, err = run(capsys, "multihome", "--config", write_cfg({"model": "multihome", "params": params}))
    assert code == 3 and "ambiguous_regime" in err


def test_model_mismatch_exit_2(write_cfg, capsys):
    assert run(capsys, "duopoly", "--config", write_cfg({"model": "monopoly", "params": MONO}))[0] == 2


def test_monopoly_json(write_cfg, capsys):
    code, out, _ = run(capsys, "monopoly", "--config", write_cfg({"model": "monopoly", "params": MONO}),
                       "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["prices"]["p_b"] == pytest.approx(1.2302325581, abs=1e-9)
    assert doc["participation"]["q_c"] == pytest.approx(0.8476744186, abs=1e-9)
    assert doc["profits"][0] == pytest.approx(1.1537790698, abs=1e-9)


def test_monopoly_csv_schema(write_cfg, capsys):
    code, out, _ = run(capsys, "monopoly", "--config", write_cfg({"model": "monopoly", "params": MONO}),
                       "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    row = next(csv.DictReader(io.StringIO(out)))
    assert row["p_nb"] == "" and row["r_n"] == ""
    assert float(row["p_wb"]) == monopoly_equilibrium(cli.parse_config(json.dumps(
        {"model": "monopoly", "params": MONO})).params).prices.p_b


def test_constrained_cli(write_cfg, capsys):
    code, out, _ = run(capsys, "constrained", "--config", write_cfg({"model": "constrained", "params": DUO}),
                       "--eta", "0.01", "--format", "csv")
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert row["feasible"] == "true" and abs(float(row["gap"])) <= 0.01
    assert run(capsys, "constrained", "--config", write_cfg({"model": "constrained", "params": DUO}))[0] == 2


def test_sweep_csv(write_cfg, capsys, tmp_path):
    out_path = tmp_path / "grid.csv"
    code, _, _ = run(capsys, "sweep", "--config", write_cfg({"model": "duopoly", "params": DUO}),
                     "--x", "alpha_plus:0.9:2.7:6", "--y", "alpha_minus:-0.7:0.7:5", "--out", str(out_path))
    assert code == 0
    rows = list(csv.DictReader(out_path.open()))
    assert len(rows) == 30
    assert rows[0]["x_key"] == "alpha_plus" and rows[0]["y_key"] == "alpha_minus"
    assert all(r["error"] == "" for r in rows)


def test_sweep_needs_axis(write_cfg, capsys):
    assert run(capsys, "sweep", "--config", write_cfg({"model": "duopoly", "params": DUO}))[0] == 2
    assert run(capsys, "sweep", "--config", write_cfg({"model": "duopoly", "params": DUO}),
               "--x", "gamma:0:1:3")[0] == 2


def test_json_round_trip_bit_exact(write_cfg, capsys):
    for model, params in (("monopoly", MONO), ("duopoly", DUO), ("multihome", ONESIDED)):
        code, out, _ = run(capsys, model, "--config", write_cfg({"model": model, "params": params}))
        assert code == 0
        doc = json.loads(out)
        assert outcome_to_dict(outcome_from_dict(doc)) == doc
        assert json.dumps(outcome_to_dict(outcome_from_dict(doc)), indent=2) + "\n" == out


def test_atomic_write_replaces(tmp_path):
    target = tmp_path / "out.txt"
    target.write_text("old")
    atomic_write(str(target), "new")
    assert target.read_text() == "new"
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]


def test_atomic_write_leaves_no_temp_on_failure(tmp_path):
    with pytest.raises(OSError):
        atomic_write(str(tmp_path / "missing" / "out.txt"), "x")
    assert os.listdir(tmp_path) == []
