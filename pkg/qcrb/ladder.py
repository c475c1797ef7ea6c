"""
Aggregation of the individual bounds into one BoundReport, weight
resolution for the command line and the r sweep over the example families.
"""

import json
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

import qcrb.utils as utils
from qcrb.bounds import (
    BoundReport,
    bound_beta,
    bound_rld,
    bound_sld,
    max_beta_closed_form,
    max_beta_scan,
    suzuki_bound,
    upper_bound_2sld,
)
from qcrb.config import RunConfig, SolverConfig
from qcrb.errors import DegenerateCase, FormatError, InvalidInput
from qcrb.holevo import (
    build_extension,
    dinv_check,
    holevo_min_f,
    holevo_sdp,
    optimal_observables,
)
from qcrb.logderiv import fisher_beta
from qcrb.matcore import WeightMatrix
from qcrb.model import ModelPoint, classical_model, example_dim2, example_dim4, load_model

log = utils.get_logger("qcrb.Ladder")

SWEEP_COLUMNS = ["r", "beta_star", "c_max_beta", "c_holevo", "c_sld", "c_rld"]


def load_weight(path: str) -> WeightMatrix:
    """
    Weight file: a JSON matrix of reals, bare or under the key "G".
    """
    try:
        data = utils.read_json(path)
    except (OSError, json.JSONDecodeError) as e:
        raise FormatError(f"cannot read weight file {path}: {e}") from e
    if isinstance(data, dict):
        data = data.get("G")
    try:
        g = np.array(data, dtype=float)
    except (TypeError, ValueError) as e:
        raise FormatError(f"weight file {path} is not a real matrix: {e}") from e
    if g.ndim != 2:
        raise FormatError(f"weight file {path} must hold a square matrix")
    return WeightMatrix(g)


def resolve_weight(spec: str, m: ModelPoint) -> WeightMatrix:
    """identity, sld (G = J^(S)) or a weight file path."""
    if spec == "identity":
        return WeightMatrix.identity(m.d)
    if spec == "sld":
        return WeightMatrix(fisher_beta(m, 0.0).real)
    if not os.path.exists(spec):
        raise InvalidInput(f"weight must be identity, sld or an existing file: '{spec}'")
    g = load_weight(spec)
    if g.d != m.d:
        raise InvalidInput(f"weight is {g.d}x{g.d} but the model has {m.d} parameters")
    return g


def build_model(cfg: RunConfig, r: Optional[float] = None) -> ModelPoint:
    if cfg.model_path:
        return load_model(cfg.model_path)
    r = cfg.r if r is None else r
    if cfg.builtin == "dim2":
        return example_dim2(cfg.a, r)
    if cfg.builtin == "dim4":
        return example_dim4(cfg.a, r)
    if cfg.builtin == "classical":
        return classical_model(cfg.p)
    raise InvalidInput(f"unknown builtin model '{cfg.builtin}'")


def compute_ladder(
    m: ModelPoint,
    g: WeightMatrix,
    betas: Sequence[float] = (),
    solver: Optional[SolverConfig] = None,
    with_sdp: bool = True,
    with_observables: bool = True,
    with_dinv: bool = True,
) -> BoundReport:
    """
    Every bound of the ladder for one model and weight.
    """
    log.info("Computing bounds for %s", m.label)
    report = BoundReport(label=m.label)
    report.c_sld = bound_sld(g, m)
    report.c_rld = bound_rld(g, m)
    report.method_tags["c_sld"] = "fisher inverse"
    report.method_tags["c_rld"] = "fisher inverse"
    for b in betas:
        report.c_beta[float(b)] = bound_beta(g, m, float(b))
    report.c_beta_star, report.beta_star = max_beta_scan(g, m, solver)
    report.method_tags["c_beta_star"] = "grid+brent"
    report.c_upper = upper_bound_2sld(g, m)

    ext = build_extension(m, solver)
    report.extension_dim = ext.r
    if ext.rank_one is not None:
        a, b = ext.rank_one
        report.c_closed_form, report.beta_closed_form = max_beta_closed_form(g, a, b)
        report.method_tags["c_closed_form"] = "rank-one closed form"

    sol = holevo_min_f(g, ext, solver)
    report.c_holevo = sol.value
    report.method_tags["c_holevo"] = sol.method
    if with_sdp:
        report.c_holevo_sdp = holevo_sdp(g, ext, solver).value
        report.method_tags["c_holevo_sdp"] = "barrier sdp"

    if m.dim == 2 and m.d == 2:
        try:
            report.c_suzuki = suzuki_bound(g, m)
            report.method_tags["c_suzuki"] = "qubit formula"
        except DegenerateCase as e:
            log.warning("Qubit formula skipped: %s", e)

    if with_observables and (ext.r == ext.d or (ext.d == 2 and ext.r == 3 and ext.rank_one is not None)):
        report.observables = optimal_observables(m, g, ext)
    if with_dinv:
        report.dinv = dinv_check(m).to_dict()

    bad = report.chain_violations()
    if bad:
        log.warning("Bound chain violated for %s: %s", m.label, ", ".join(bad))
    return report


### Sweep ###


def r_grid(lo: float, hi: float, step: float) -> List[float]:
    """lo, lo + step, ... up to hi inclusive, rounded to 12 digits."""
    if step <= 0 or hi < lo:
        raise InvalidInput(f"invalid r-range {lo}:{hi}:{step}")
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(n)]


def sweep_row(cfg: RunConfig, r: float) -> Dict[str, Any]:
    m = build_model(cfg, r)
    g = resolve_weight(cfg.weight, m)
    report = compute_ladder(
        m, g, solver=cfg.solver, with_sdp=False, with_observables=False, with_dinv=False
    )
    return {
        "r": r,
        "beta_star": report.beta_star,
        "c_max_beta": report.c_beta_star,
        "c_holevo": report.c_holevo,
        "c_sld": report.c_sld,
        "c_rld": report.c_rld,
    }


def sweep(cfg: RunConfig) -> List[Dict[str, Any]]:
    """
    One row per grid point, in grid order; rows are computed on cfg.jobs
    worker threads.
    """
    if cfg.r_range is None:
        raise InvalidInput("sweep needs an r-range")
    rs = r_grid(*cfg.r_range)
    log.info("Sweeping %s over %d points with %d job(s)", cfg.builtin, len(rs), cfg.jobs)
    if cfg.jobs <= 1:
        return [sweep_row(cfg, r) for r in rs]
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(lambda r: sweep_row(cfg, r), rs))
