import os
import json
import logging
from typing import Any, Dict, List, Optional, Tuple

import qcrb.utils as utils
from qcrb.errors import FormatError, InvalidInput


BUILTIN_MODELS = ("dim2", "dim4", "classical")
WEIGHT_KEYWORDS = ("identity", "sld")
COMMANDS = ("bounds", "sweep", "check")
FORMATS = ("table", "csv", "json")

# contraction used by the example sweeps
DEFAULT_A = 0.95

# json keys of RunConfig and the type each value is converted to
CONFIG_FIELDS: Dict[str, Any] = {
    "command": str, "model_path": str, "builtin": str, "a": float, "r": float,
    "p": float, "weight": str, "fmt": str, "output": str, "seed": int,
    "suite": str, "jobs": int,
}


class SolverConfig:
    """
    Numerical tolerances and schedules shared by the solvers
    - herm_tol: relative Hermiticity drift accepted (and symmetrized) on construction
    - trace_tol: |Tr rho - 1| accepted for density matrices
    - positivity_floor: smallest admissible density eigenvalue
    - closure_tol: norm below which a commutation image is already in the span
    - smoothing_schedule: epsilon values of the smoothed nuclear norm, warm-started
    - grad_tol: gradient norm at which the final smoothing stage is converged
    - max_inner_iter: iteration cap for each quasi-Newton solve
    - mu_start / mu_stop / mu_factor: barrier parameter schedule
    - scan_points: grid size of the beta scan
    - refine_tol: interval length of the beta refinement
    - fd_step: central difference step for numeric tangents
    """

    herm_tol: float = 1e-12
    trace_tol: float = 1e-10
    positivity_floor: float = 1e-10
    closure_tol: float = 1e-8
    smoothing_schedule: Tuple[float, ...] = (1e-2, 1e-4, 1e-6, 1e-9)
    grad_tol: float = 1e-9
    max_inner_iter: int = 10000
    mu_start: float = 1.0
    mu_stop: float = 1e-10
    mu_factor: float = 0.2
    max_newton_iter: int = 100
    scan_points: int = 1001
    refine_tol: float = 1e-10
    fd_step: float = 1e-5

    def __init__(self, **kwargs: Any):
        for k, v in kwargs.items():
            if not hasattr(SolverConfig, k):
                raise InvalidInput(f"unknown solver option '{k}'")
            if k == "smoothing_schedule":
                v = tuple(float(e) for e in v)
            setattr(self, k, v)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "herm_tol": self.herm_tol,
            "trace_tol": self.trace_tol,
            "positivity_floor": self.positivity_floor,
            "closure_tol": self.closure_tol,
            "smoothing_schedule": list(self.smoothing_schedule),
            "grad_tol": self.grad_tol,
            "max_inner_iter": self.max_inner_iter,
            "mu_start": self.mu_start,
            "mu_stop": self.mu_stop,
            "mu_factor": self.mu_factor,
            "max_newton_iter": self.max_newton_iter,
            "scan_points": self.scan_points,
            "refine_tol": self.refine_tol,
            "fd_step": self.fd_step,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SolverConfig":
        return cls(**data)


DEFAULT_SOLVER = SolverConfig()


def solver_or_default(cfg: Optional[SolverConfig]) -> SolverConfig:
    return cfg if cfg is not None else DEFAULT_SOLVER


class RunConfig:
    """
    Configuration object for one command line run
    - command: bounds, sweep or check
    - model_path / builtin: model file or builtin example name (dim2, dim4, classical)
    - a, r, p: builtin example parameters
    - weight: identity, sld or a path to a json weight matrix
    - beta_list: extra beta values reported by `bounds`
    - r_range: (lo, hi, step) for `sweep`
    - fmt: table, csv or json; output: file path or None for standard output
    - seed / suite: randomized check suite selection
    - jobs: worker threads for `sweep`
    - log: logger
    """

    log: logging.Logger

    command: str = "bounds"
    model_path: Optional[str] = None
    builtin: Optional[str] = None
    a: float = DEFAULT_A
    r: float = 0.0
    p: float = 0.3
    weight: str = "sld"
    beta_list: List[float] = []
    r_range: Optional[Tuple[float, float, float]] = None
    fmt: str = "table"
    output: Optional[str] = None
    seed: int = 0
    suite: Optional[str] = None
    jobs: int = 1
    solver: SolverConfig

    def __init__(self, log: Optional[logging.Logger] = None, **kwargs: Any):
        self.log = log or utils.get_logger("qcrb.Run")
        self.beta_list = []
        self.solver = SolverConfig()
        for k, v in kwargs.items():
            if not hasattr(RunConfig, k) and k != "solver":
                raise InvalidInput(f"unknown run option '{k}'")
            setattr(self, k, v)

    def init_defaults(self) -> None:
        """
        Defaults: the qubit example at r = 0.1 with the SLD weight
        """
        self.command = "bounds"
        self.model_path = None
        self.builtin = "dim2"
        self.a = DEFAULT_A
        self.r = 0.1
        self.weight = "sld"
        self.fmt = "table"

    @property
    def model_source(self) -> str:
        if self.model_path:
            return self.model_path
        return f"builtin:{self.builtin}"

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise InvalidInput(f"unknown command '{self.command}'")
        if self.fmt not in FORMATS:
            raise InvalidInput(f"unknown format '{self.fmt}'")
        if self.command == "check":
            return
        if self.model_path is None and self.builtin is None:
            raise InvalidInput("either a model file or a builtin example is required")
        if self.model_path is not None and self.builtin is not None:
            raise InvalidInput("a model file and a builtin example are exclusive")
        if self.builtin is not None:
            if self.builtin not in BUILTIN_MODELS:
                raise InvalidInput(
                    f"builtin must be one of {', '.join(BUILTIN_MODELS)}, got '{self.builtin}'"
                )
            if self.builtin == "classical":
                if not 0.0 < self.p < 1.0:
                    raise InvalidInput(f"p must lie in (0, 1), got {self.p}")
            else:
                if not 0.0 < self.a < 1.0:
                    raise InvalidInput(f"a must lie in (0, 1), got {self.a}")
                if not 0.0 <= self.r < 1.0:
                    raise InvalidInput(f"r must lie in [0, 1), got {self.r}")
        if self.weight not in WEIGHT_KEYWORDS and not os.path.exists(self.weight):
            raise InvalidInput(f"weight must be identity, sld or an existing file: '{self.weight}'")
        for b in self.beta_list:
            if not 0.0 <= b <= 1.0:
                raise InvalidInput(f"beta values must lie in [0, 1], got {b}")
        if self.command == "sweep":
            if self.builtin not in ("dim2", "dim4"):
                raise InvalidInput("sweep needs --builtin dim2 or dim4")
            if self.r_range is None:
                raise InvalidInput("sweep needs --r-range LO:HI:STEP")
            lo, hi, step = self.r_range
            if step <= 0 or lo > hi or lo < 0 or hi >= 1:
                raise InvalidInput(f"invalid r-range {lo}:{hi}:{step}")
        if self.jobs < 1:
            raise InvalidInput("jobs must be positive")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "model_path": self.model_path,
            "builtin": self.builtin,
            "a": self.a,
            "r": self.r,
            "p": self.p,
            "weight": self.weight,
            "beta_list": list(self.beta_list),
            "r_range": list(self.r_range) if self.r_range is not None else None,
            "fmt": self.fmt,
            "output": self.output,
            "seed": self.seed,
            "suite": self.suite,
            "jobs": self.jobs,
            "solver": self.solver.to_dict(),
        }

    def read_config(self, filename: str) -> None:
        """
        Read configuration from a file (JSON); keys missing from the file keep
        their current values
        """
        self.log.debug("Reading run config from %s", filename)
        if not os.path.exists(filename):
            self.log.error("Config file not found: %s", filename)
            raise FileNotFoundError(filename)

        with open(filename, "r") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as e:
                self.log.error("Config file %s is not valid JSON: %s", filename, e)
                raise FormatError(f"config file {filename} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise FormatError(f"config file {filename} must hold a JSON object")

        try:
            for key, cast in CONFIG_FIELDS.items():
                value = data.get(key, getattr(self, key))
                setattr(self, key, None if value is None and cast is str else cast(value))
            self.beta_list = [float(b) for b in data.get("beta_list", self.beta_list)]
            rr = data.get("r_range")
            if rr is not None:
                if len(rr) != 3:
                    raise InvalidInput("r_range must hold [lo, hi, step]")
                self.r_range = (float(rr[0]), float(rr[1]), float(rr[2]))
        except (TypeError, ValueError) as e:
            if isinstance(e, InvalidInput):
                raise
            self.log.error("Config file %s has a malformed value: %s", filename, e)
            raise FormatError(f"config file {filename} has a malformed value: {e}") from e
        if data.get("solver") is not None:
            self.solver = SolverConfig.from_dict(data["solver"])

        self.log.info(
            "Loaded run config: command=%s model=%s weight=%s",
            self.command, self.model_source, self.weight,
        )

    def write_config(self, filename: str) -> None:
        """
        Write configuration to a file (JSON)
        """
        self.log.debug("Writing run config to %s", filename)
        dirpath = os.path.dirname(filename)
        if dirpath and not os.path.exists(dirpath):
            os.makedirs(dirpath, exist_ok=True)
        try:
            with open(filename, "w") as fh:
                json.dump(self.to_dict(), fh, indent=2)
            self.log.info("Wrote run config to %s", filename)
        except Exception as e:
            self.log.exception("Failed to write config to %s: %s", filename, e)
            raise
