"""
Scalar bounds on Tr G V: SLD, RLD, beta, maximum logarithmic derivative
(grid scan and closed form), the explicit qubit formula and 2 C^(S).
"""

from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

import qcrb.utils as utils
from qcrb.config import SolverConfig, solver_or_default
from qcrb.errors import DegenerateCase, InvalidInput
from qcrb.logderiv import (
    FisherMatrix,
    beta_kernel,
    beta_log_derivative,
    classical_fisher,
    fisher_beta,
    fisher_from_kernel,
    fisher_monotone,
)
from qcrb.matcore import WeightMatrix, as_weight, nuclear_norm
from qcrb.model import ModelPoint

log = utils.get_logger("qcrb.Bounds")

Weight = Union[WeightMatrix, np.ndarray, list]

CHAIN_TOL = 1e-8


class BoundReport:
    """
    The bound ladder of one model and weight.
    - c_sld, c_rld: SLD and RLD bounds
    - c_beta: requested beta -> C^(beta)
    - beta_star, c_beta_star: maximizer and value of the max-beta bound
    - c_closed_form: closed-form max-beta value (rank-one extensions only)
    - c_holevo, c_holevo_sdp: Holevo bound from the two solvers
    - c_suzuki: explicit qubit formula (dim 2, d = 2 only)
    - c_upper: 2 C^(S)
    - method_tags: how each value was obtained
    """

    label: str = ""
    c_sld: float
    c_rld: float
    c_beta: Dict[float, float]
    beta_star: float
    c_beta_star: float
    c_closed_form: Optional[float] = None
    beta_closed_form: Optional[float] = None
    c_holevo: Optional[float] = None
    c_holevo_sdp: Optional[float] = None
    c_suzuki: Optional[float] = None
    c_upper: float
    method_tags: Dict[str, str]
    extension_dim: Optional[int] = None
    dinv: Optional[Dict[str, Any]] = None
    observables: Optional[List[np.ndarray]] = None

    def __init__(self, label: str = "", **kwargs: Any):
        self.label = label
        self.c_beta = {}
        self.method_tags = {}
        for k, v in kwargs.items():
            if not hasattr(BoundReport, k) and k not in BoundReport.__annotations__:
                raise InvalidInput(f"unknown report field '{k}'")
            setattr(self, k, v)

    @property
    def c_max_beta(self) -> float:
        return self.c_beta_star

    def chain_violations(self, tol: float = CHAIN_TOL) -> List[str]:
        """
        Names of the violated links of 2C^(S) >= C^(H) >= max-beta >= max(C^(S), C^(R)).
        """
        bad = []
        floor = max(self.c_sld, self.c_rld)
        if self.c_beta_star < floor - tol:
            bad.append("max_beta >= max(sld, rld)")
        if self.c_holevo is not None:
            if self.c_holevo < self.c_beta_star - tol:
                bad.append("holevo >= max_beta")
            if self.c_upper < self.c_holevo - tol:
                bad.append("2 sld >= holevo")
        return bad

    def to_dict(self) -> Dict[str, Any]:
        d: Dict[str, Any] = {
            "label": self.label,
            "c_sld": self.c_sld,
            "c_rld": self.c_rld,
            "c_beta": {f"{b:g}": v for b, v in sorted(self.c_beta.items())},
            "beta_star": self.beta_star,
            "c_max_beta": self.c_beta_star,
            "c_closed_form": self.c_closed_form,
            "beta_closed_form": self.beta_closed_form,
            "c_holevo": self.c_holevo,
            "c_holevo_sdp": self.c_holevo_sdp,
            "c_suzuki": self.c_suzuki,
            "c_upper": self.c_upper,
            "extension_dim": self.extension_dim,
            "method_tags": dict(self.method_tags),
        }
        if self.dinv is not None:
            d["dinv"] = dict(self.dinv)
        if self.observables is not None:
            d["observables"] = [utils.complex_to_pairs(b) for b in self.observables]
        return d

    def rows(self) -> List[Dict[str, Any]]:
        """(quantity, value, method) rows in display order."""
        out = [
            {"quantity": "C_sld", "value": self.c_sld, "method": self.method_tags.get("c_sld", "")},
            {"quantity": "C_rld", "value": self.c_rld, "method": self.method_tags.get("c_rld", "")},
        ]
        for b, v in sorted(self.c_beta.items()):
            out.append({"quantity": f"C_beta({b:g})", "value": v, "method": "fisher inverse"})
        out.append({"quantity": "beta_star", "value": self.beta_star, "method": self.method_tags.get("c_beta_star", "")})
        out.append({"quantity": "C_max_beta", "value": self.c_beta_star, "method": self.method_tags.get("c_beta_star", "")})
        optional = [
            ("beta_closed_form", self.beta_closed_form, "c_closed_form"),
            ("C_closed_form", self.c_closed_form, "c_closed_form"),
            ("C_holevo", self.c_holevo, "c_holevo"),
            ("C_holevo_sdp", self.c_holevo_sdp, "c_holevo_sdp"),
            ("C_suzuki", self.c_suzuki, "c_suzuki"),
        ]
        for name, value, tag in optional:
            if value is not None:
                out.append({"quantity": name, "value": value, "method": self.method_tags.get(tag, "")})
        out.append({"quantity": "C_upper", "value": self.c_upper, "method": "2 C_sld"})
        if self.dinv is not None:
            for key in ("tangent_residual", "sld_residual", "beta_span_residual", "fisher_identity_error"):
                out.append({"quantity": f"dinv_{key}", "value": self.dinv[key], "method": "diagnostic"})
            out.append({"quantity": "dinv_invariant", "value": float(self.dinv["invariant"]), "method": "diagnostic"})
        return out


### Helpers ###


def _weight_for(g: Weight, m: ModelPoint) -> WeightMatrix:
    w = as_weight(g)
    if w.d != m.d:
        raise InvalidInput(f"weight is {w.d}x{w.d} but the model has {m.d} parameters")
    return w


def bound_from_inverse(g: WeightMatrix, j_inv: np.ndarray) -> float:
    """
    Tr G Re J^-1 + Tr|sqrt(G) Im J^-1 sqrt(G)|
    """
    return float(np.trace(g.entries @ j_inv.real)) + nuclear_norm(g.sqrt @ j_inv.imag @ g.sqrt)


### Bounds ###


def bound_sld(g: Weight, m: ModelPoint) -> float:
    w = _weight_for(g, m)
    return float(np.trace(w.entries @ fisher_beta(m, 0.0).inverse().real))


def bound_beta(g: Weight, m: ModelPoint, beta: float) -> float:
    if not 0.0 <= beta <= 1.0:
        raise InvalidInput(f"beta must lie in [0, 1], got {beta}")
    w = _weight_for(g, m)
    return bound_from_inverse(w, fisher_beta(m, beta).inverse())


def bound_rld(g: Weight, m: ModelPoint) -> float:
    return bound_beta(g, m, 1.0)


def bound_monotone(g: Weight, m: ModelPoint, p_fn: Callable[[float], float], label: str = "P") -> float:
    w = _weight_for(g, m)
    return bound_from_inverse(w, fisher_monotone(m, p_fn, label).inverse())


def classical_bound(g: Weight, m: ModelPoint, povm: Sequence[np.ndarray]) -> float:
    """Tr G J^(M)^-1 for a fixed measurement."""
    w = _weight_for(g, m)
    return float(np.trace(w.entries @ classical_fisher(m, povm).inverse().real))


def upper_bound_2sld(g: Weight, m: ModelPoint) -> float:
    return 2.0 * bound_sld(g, m)


def beta_curve(g: Weight, m: ModelPoint) -> Callable[[float], float]:
    """
    beta -> C^(beta) with the eigen-decomposition of the model shared
    between evaluations.
    """
    w = _weight_for(g, m)
    lam = m.rho.eigenvalues
    tangents = m.eigen_tangents

    def curve(beta: float) -> float:
        j = FisherMatrix(fisher_from_kernel(tangents, beta_kernel(lam, beta)), "BETA", beta)
        return bound_from_inverse(w, j.inverse())

    return curve


def max_beta_scan(
    g: Weight, m: ModelPoint, solver: Optional[SolverConfig] = None
) -> Tuple[float, float]:
    """
    Maximize C^(beta) over [0, 1] on a dense grid, then refine the winning
    cell with bounded Brent. Ties on the grid go to the largest beta.
    """
    cfg = solver_or_default(solver)
    curve = beta_curve(g, m)
    grid = np.linspace(0.0, 1.0, cfg.scan_points)
    values = np.array([curve(b) for b in grid])
    top = float(np.max(values))
    tie_tol = 1e-12 * max(1.0, abs(top))
    idx = int(np.nonzero(values >= top - tie_tol)[0][-1])
    beta_star, c_star = float(grid[idx]), float(values[idx])

    lo = grid[max(idx - 1, 0)]
    hi = grid[min(idx + 1, len(grid) - 1)]
    res = minimize_scalar(
        lambda b: -curve(b), bounds=(lo, hi), method="bounded",
        options={"xatol": cfg.refine_tol},
    )
    if res.success and -res.fun > c_star + tie_tol:
        beta_star, c_star = float(res.x), float(-res.fun)
    log.debug("max-beta scan: grid beta=%g, refined beta=%.10f, C=%.12g", grid[idx], beta_star, c_star)
    return c_star, beta_star


def quadratic_beta_bound(g: Weight, a: np.ndarray, b: np.ndarray, beta: float) -> float:
    """
    C^(beta) in rank-one form: Tr G Re A + beta Tr|sqrt(G) Im A sqrt(G)| - beta^2 <b|G|b>
    """
    w = as_weight(g)
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=float)
    nuc = nuclear_norm(w.sqrt @ a.imag @ w.sqrt)
    return float(np.trace(w.entries @ a.real)) + beta * nuc - beta**2 * float(b @ w.entries @ b)


def max_beta_closed_form(g: Weight, a: np.ndarray, b: np.ndarray) -> Tuple[float, float]:
    """
    Maximum of the rank-one quadratic over beta in [0, 1].

    The unconstrained maximizer is Tr|sqrt(G) Im A sqrt(G)| / (2 <b|G|b>),
    infinite when b = 0; at or beyond 1 the value at beta = 1 is returned.
    """
    w = as_weight(g)
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.shape != (w.d, w.d) or b.shape != (w.d,):
        raise InvalidInput(f"A and b must match the weight size {w.d}")
    nuc = nuclear_norm(w.sqrt @ a.imag @ w.sqrt)
    bgb = float(b @ w.entries @ b)
    beta_hat = np.inf if bgb <= 0.0 else nuc / (2.0 * bgb)
    if beta_hat >= 1.0:
        return quadratic_beta_bound(w, a, b, 1.0), 1.0
    return float(np.trace(w.entries @ a.real)) + nuc**2 / (4.0 * bgb), float(beta_hat)


def lagrangian_dual_value(g: Weight, a: np.ndarray, b: np.ndarray, lam: float) -> float:
    """
    Dual function of the two-parameter Holevo problem at multiplier lam >= 0;
    it equals the rank-one quadratic at beta = (2 - lam) / 2.
    """
    if lam < 0:
        raise InvalidInput(f"multiplier must be nonnegative, got {lam}")
    return quadratic_beta_bound(g, a, b, (2.0 - lam) / 2.0)


def suzuki_terms(g: Weight, m: ModelPoint) -> Dict[str, float]:
    """
    C^(S), C^(R) and C^(Z) = Tr G Re Z + Tr|sqrt(G) Im Z sqrt(G)| with
    Z_ij = Tr rho L^j L^i over the dual SLDs L^i = sum_k (J^(S)^-1)_ik L_k.
    """
    if m.dim != 2 or m.d != 2:
        raise InvalidInput(f"explicit qubit formula needs dim 2 and d 2, got dim {m.dim}, d {m.d}")
    w = _weight_for(g, m)
    ops = beta_log_derivative(m, 0.0).operators
    rho = m.rho.data
    j_inv = fisher_beta(m, 0.0).inverse().real
    raw = np.array([[np.trace(rho @ lj @ li) for lj in ops] for li in ops])
    z = utils.hermitian_part(j_inv @ raw @ j_inv)
    return {
        "c_sld": bound_sld(w, m),
        "c_rld": bound_rld(w, m),
        "c_z": bound_from_inverse(w, z),
    }


def suzuki_bound(g: Weight, m: ModelPoint) -> float:
    t = suzuki_terms(g, m)
    c_s, c_r, c_z = t["c_sld"], t["c_rld"], t["c_z"]
    mid = 0.5 * (c_z + c_s)
    if c_r >= mid:
        return c_r
    if abs(c_z - c_r) <= 1e-14 * max(1.0, abs(c_z)):
        log.error("Qubit formula denominator vanishes: C_z=%g C_r=%g", c_z, c_r)
        raise DegenerateCase("C^(Z) equals C^(R) on the quadratic branch")
    return c_r + (mid - c_r) ** 2 / (c_z - c_r)


def suzuki_branch(g: Weight, m: ModelPoint) -> str:
    """'rld' when the formula returns C^(R) unchanged, otherwise 'quadratic'."""
    t = suzuki_terms(g, m)
    return "rld" if t["c_rld"] >= 0.5 * (t["c_z"] + t["c_sld"]) else "quadratic"
