import json

import pytest

from qcrb.config import DEFAULT_SOLVER, RunConfig, SolverConfig, solver_or_default
from qcrb.errors import FormatError, InvalidInput


def test_import_config():
    import importlib
    importlib.import_module("qcrb.config")


### Tests for SolverConfig

def test_solver_defaults():
    s = SolverConfig()
    assert s.scan_points == 1001
    assert s.smoothing_schedule == (1e-2, 1e-4, 1e-6, 1e-9)
    assert s.mu_factor < 1
    assert solver_or_default(None) is DEFAULT_SOLVER
    assert solver_or_default(s) is s


def test_solver_options():
    s = SolverConfig(grad_tol=1e-7, smoothing_schedule=[1e-3, 1e-6])
    assert s.grad_tol == 1e-7
    assert s.smoothing_schedule == (1e-3, 1e-6)
    # instance overrides leave the class defaults alone
    assert SolverConfig().grad_tol == 1e-9
    with pytest.raises(InvalidInput):
        SolverConfig(tolerance=1e-3)


def test_solver_dict():
    s = SolverConfig(max_inner_iter=50)
    again = SolverConfig.from_dict(json.loads(json.dumps(s.to_dict())))
    assert again.to_dict() == s.to_dict()
    assert again.max_inner_iter == 50


### Tests for RunConfig

def test_run_config_init_defaults():
    cfg = RunConfig()
    cfg.init_defaults()
    assert cfg.builtin == "dim2"
    assert cfg.a == 0.95
    assert cfg.r == 0.1
    assert cfg.weight == "sld"
    assert cfg.model_source == "builtin:dim2"
    cfg.validate()


def test_run_config_lists_not_shared():
    a = RunConfig()
    b = RunConfig()
    a.beta_list.append(0.5)
    assert b.beta_list == []
    assert a.solver is not b.solver


def test_run_config_unknown_option():
    with pytest.raises(InvalidInput):
        RunConfig(colour="red")


@pytest.mark.parametrize(
    "changes",
    [
        {"command": "plot"},
        {"fmt": "xml"},
        {"builtin": None},
        {"model_path": "model.json"},
        {"builtin": "dim8"},
        {"a": 1.0},
        {"r": 1.0},
        {"r": -0.1},
        {"builtin": "classical", "p": 1.5},
        {"weight": "no-such-weight.json"},
        {"beta_list": [0.5, 1.5]},
        {"jobs": 0},
        {"command": "sweep"},
        {"command": "sweep", "r_range": (0.0, 0.5, 0.1), "builtin": "classical"},
        {"command": "sweep", "r_range": (0.5, 0.1, 0.1)},
        {"command": "sweep", "r_range": (0.0, 1.0, 0.1)},
        {"command": "sweep", "r_range": (0.0, 0.5, 0.0)},
    ],
)
def test_run_config_validate_rejects(changes):
    cfg = RunConfig()
    cfg.init_defaults()
    for k, v in changes.items():
        setattr(cfg, k, v)
    with pytest.raises(InvalidInput):
        cfg.validate()


def test_run_config_check_skips_model_rules():
    cfg = RunConfig(command="check", builtin=None)
    cfg.validate()


def test_run_config_sweep_valid():
    cfg = RunConfig()
    cfg.init_defaults()
    cfg.command = "sweep"
    cfg.builtin = "dim4"
    cfg.r_range = (0.0, 0.9, 0.1)
    cfg.validate()


def test_run_config_read_write(tmp_path):
    cfg = RunConfig()
    cfg.init_defaults()
    cfg.command = "sweep"
    cfg.r_range = (0.0, 0.5, 0.05)
    cfg.beta_list = [0.0, 0.5]
    cfg.solver = SolverConfig(scan_points=201)
    path = tmp_path / "sub" / "run.json"
    cfg.write_config(str(path))
    assert path.exists()

    other = RunConfig()
    other.read_config(str(path))
    assert other.to_dict() == cfg.to_dict()
    assert other.r_range == (0.0, 0.5, 0.05)
    assert other.solver.scan_points == 201


def test_run_config_partial_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"builtin": "dim4", "r": 0.3}))
    cfg = RunConfig()
    cfg.init_defaults()
    cfg.read_config(str(path))
    assert cfg.builtin == "dim4"
    assert cfg.r == 0.3
    assert cfg.weight == "sld"
    assert cfg.a == 0.95


def test_run_config_read_errors(tmp_path):
    cfg = RunConfig()
    with pytest.raises(FileNotFoundError):
        cfg.read_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(FormatError):
        cfg.read_config(str(bad))
    listed = tmp_path / "list.json"
    listed.write_text("[1, 2]")
    with pytest.raises(FormatError):
        cfg.read_config(str(listed))
    short = tmp_path / "short.json"
    short.write_text(json.dumps({"r_range": [0, 1]}))
    with pytest.raises(InvalidInput):
        cfg.read_config(str(short))


def test_run_config_casts_string_values(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"a": "0.5", "r": "0.25", "seed": "7", "beta_list": ["0.5"]}))
    cfg = RunConfig()
    cfg.init_defaults()
    cfg.read_config(str(path))
    assert cfg.a == 0.5
    assert cfg.r == 0.25
    assert cfg.seed == 7
    assert cfg.beta_list == [0.5]
    cfg.validate()


@pytest.mark.parametrize(
    "data",
    [{"a": "abc"}, {"jobs": [2]}, {"seed": "1.5"}, {"beta_list": ["x"]}, {"r_range": [0, "one", 0.1]}],
)
def test_run_config_malformed_values(tmp_path, data):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(data))
    cfg = RunConfig()
    cfg.init_defaults()
    with pytest.raises(FormatError):
        cfg.read_config(str(path))
