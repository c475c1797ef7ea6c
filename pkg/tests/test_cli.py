import json
import logging

import pytest

from qcrb.cli import build_parser, main


@pytest.fixture(autouse=True)
def _quiet_logger():
    yield
    # main() attaches handlers to the package logger
    for h in list(logging.getLogger("qcrb").handlers):
        logging.getLogger("qcrb").removeHandler(h)


def test_import_cli():
    import importlib
    importlib.import_module("qcrb.cli")


def test_parser_values():
    args = build_parser().parse_args(
        ["sweep", "--builtin", "dim4", "--r-range", "0:0.5:0.1", "--beta", "0,0.5,1", "--debug"]
    )
    assert args.command == "sweep"
    assert args.r_range == (0.0, 0.5, 0.1)
    assert args.beta == [0.0, 0.5, 1.0]
    assert args.debug is True
    assert args.fmt is None


@pytest.mark.parametrize(
    "argv",
    [
        ["plot"],
        ["sweep", "--r-range", "0:0.5"],
        ["bounds", "--beta", "a,b"],
        ["bounds", "--builtin", "dim8"],
        ["bounds", "--format", "xml"],
    ],
)
def test_parser_errors(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_bounds_table(capsys):
    assert main(["bounds", "--builtin", "dim2", "--r", "0.1"]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0].split() == ["quantity", "value", "method"]
    names = [line.split()[0] for line in lines[2:]]
    assert names[:2] == ["C_sld", "C_rld"]
    assert "C_holevo" in names
    assert "C_suzuki" in names
    c_sld = float(lines[2].split()[1])
    assert c_sld == pytest.approx(2.0, abs=1e-9)


def test_bounds_json(capsys):
    assert main(["bounds", "--builtin", "classical", "--p", "0.3", "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["c_sld"] == pytest.approx(data["c_rld"], rel=1e-12)
    assert data["c_holevo"] == pytest.approx(data["c_sld"], rel=1e-10)
    assert data["extension_dim"] == 1


def test_bounds_betas_csv(capsys):
    assert main(["bounds", "--builtin", "dim2", "--r", "0.5", "--beta", "0,1", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "quantity,value,method"
    quantities = [line.split(",")[0] for line in lines[1:]]
    assert "C_beta(0)" in quantities and "C_beta(1)" in quantities


def test_sweep_csv(capsys):
    assert main(["sweep", "--builtin", "dim2", "--r-range", "0:0.2:0.1"]) == 0
    out = capsys.readouterr().out
    assert "\r" not in out
    lines = out.splitlines()
    assert lines[0] == "r,beta_star,c_max_beta,c_holevo,c_sld,c_rld"
    assert [line.split(",")[0] for line in lines[1:]] == ["0", "0.1", "0.2"]


def test_sweep_to_file(tmp_path, capsys):
    out = tmp_path / "sweep.json"
    argv = ["sweep", "--builtin", "dim4", "--r-range", "0:0.1:0.1", "--format", "json", "--output", str(out)]
    assert main(argv) == 0
    assert capsys.readouterr().out == ""
    rows = json.loads(out.read_text())["rows"]
    assert [row["r"] for row in rows] == [0.0, 0.1]


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"builtin": "dim2", "r": 0.3, "weight": "identity", "fmt": "csv"}))
    assert main(["bounds", "--config", str(cfg)]) == 0
    assert capsys.readouterr().out.startswith("quantity,value,method")
    # flags override the file
    assert main(["bounds", "--config", str(cfg), "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["label"] == "dim2(a=0.95, r=0.3)"


def test_malformed_model(tmp_path, capsys):
    bad = tmp_path / "model.json"
    bad.write_text("{ not json")
    assert main(["bounds", "--model", str(bad)]) == 2
    assert "FormatError" in capsys.readouterr().err


def test_invalid_parameters(capsys):
    assert main(["bounds", "--builtin", "dim2", "--r", "1.5"]) == 2
    assert "InvalidInput" in capsys.readouterr().err
    assert main(["sweep", "--builtin", "classical", "--r-range", "0:0.2:0.1"]) == 2


def test_missing_config(tmp_path, capsys):
    assert main(["bounds", "--config", str(tmp_path / "missing.json")]) == 2
    assert "FileNotFoundError" in capsys.readouterr().err


def test_check_suite(capsys):
    assert main(["check", "--suite", "examples", "--seed", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split() == ["suite", "status", "worst", "cases", "failing"]
    assert lines[2].split()[:2] == ["examples", "PASS"]


def test_check_unknown_suite(capsys):
    assert main(["check", "--suite", "nope"]) == 2
    assert "InvalidInput" in capsys.readouterr().err


def test_check_failure_exit_code(monkeypatch, capsys):
    import qcrb.checks as checks

    def failing_suite(res, rng):
        res.record("always", 1.0, 0.0)

    monkeypatch.setitem(checks.SUITES, "examples", failing_suite)
    assert main(["check", "--suite", "examples"]) == 1
    captured = capsys.readouterr()
    assert "FAIL" in captured.out
    assert "CheckFailure" in captured.err


### Tests for malformed inputs and output routing

def _qubit_model_dict(rho_pairs):
    return {
        "dim": 2,
        "d": 1,
        "rho": rho_pairs,
        "tangents": [[[[0.0, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.0, 0.0]]]],
        "label": "qubit",
    }


def test_nan_state_is_invalid_model(tmp_path, capsys):
    path = tmp_path / "model.json"
    rho = [[[float("nan"), 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]
    path.write_text(json.dumps(_qubit_model_dict(rho)))
    assert main(["bounds", "--model", str(path)]) == 2
    assert "InvalidModel" in capsys.readouterr().err


def test_nan_weight_file(tmp_path, capsys):
    weight = tmp_path / "g.json"
    weight.write_text(json.dumps([[1.0, 0.0], [0.0, float("nan")]]))
    assert main(["bounds", "--builtin", "dim2", "--weight", str(weight)]) == 2
    assert "InvalidWeight" in capsys.readouterr().err


def test_model_path_is_directory(tmp_path, capsys):
    assert main(["bounds", "--model", str(tmp_path)]) == 2
    assert "FormatError" in capsys.readouterr().err


def test_output_path_is_directory(tmp_path, capsys):
    assert main(["bounds", "--builtin", "dim2", "--output", str(tmp_path)]) == 2
    assert "IsADirectoryError" in capsys.readouterr().err


def test_config_string_values(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"builtin": "dim2", "a": "0.5", "r": "0.3", "fmt": "json"}))
    assert main(["bounds", "--config", str(cfg)]) == 0
    assert json.loads(capsys.readouterr().out)["label"] == "dim2(a=0.5, r=0.3)"
    cfg.write_text(json.dumps({"builtin": "dim2", "a": "abc"}))
    assert main(["bounds", "--config", str(cfg)]) == 2
    assert "FormatError" in capsys.readouterr().err


def test_output_format_from_extension(tmp_path, capsys):
    out = tmp_path / "ladder.csv"
    assert main(["bounds", "--builtin", "dim2", "--r", "0.1", "--output", str(out)]) == 0
    assert capsys.readouterr().out == ""
    lines = out.read_text().splitlines()
    assert lines[0] == "quantity,value,method"
    assert lines[1].startswith("C_sld,")
    table = tmp_path / "ladder.txt"
    assert main(["bounds", "--builtin", "dim2", "--r", "0.1", "--output", str(table)]) == 0
    assert table.read_text().splitlines()[0].split() == ["quantity", "value", "method"]


def test_check_failure_written_to_file(tmp_path, monkeypatch):
    import qcrb.checks as checks

    def failing_suite(res, rng):
        res.record("always", 1.0, 0.0)

    monkeypatch.setitem(checks.SUITES, "examples", failing_suite)
    out = tmp_path / "check.json"
    assert main(["check", "--suite", "examples", "--output", str(out)]) == 1
    data = json.loads(out.read_text())
    assert data["suites"][0]["status"] == "FAIL"
