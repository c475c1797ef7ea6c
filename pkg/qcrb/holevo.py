"""
Holevo bound machinery.

A D-invariant extension {D_1..D_r} of the SLD span (first d elements are the
SLDs themselves, the rest orthonormal under the SLD inner product) gives
R = (Re S)^-1 S (Re S)^-1 with S_ij = Tr rho D_j D_i, and the Holevo bound

    C^(H) = min over real f of Tr G Re Z(f) + Tr|sqrt(G) Im Z(f) sqrt(G)|,
    Z(f) = R1 + R2^H f + f^T R2 + f^T R3 f,

where R1 is the leading d x d block of R, R2 the lower-left block and R3
the trailing block. Two solvers are provided: smoothing continuation in f
and a log-det barrier method on the equivalent semidefinite program.
"""

from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import minimize, minimize_scalar

import qcrb.utils as utils
from qcrb.bounds import max_beta_closed_form
from qcrb.config import SolverConfig, solver_or_default
from qcrb.errors import (
    DegenerateModel,
    InternalError,
    InvalidInput,
    NotRankOne,
    NumericalFailure,
)
from qcrb.logderiv import beta_log_derivative, fisher_beta
from qcrb.matcore import (
    WeightMatrix,
    apply_commutation,
    as_weight,
    inner_beta,
    min_real_cov,
    nuclear_norm,
    psd_sqrt,
    schur_complement,
    sld_inner,
)
from qcrb.model import ModelPoint

log = utils.get_logger("qcrb.Holevo")

Weight = Union[WeightMatrix, np.ndarray, list]

SHAPE_TOL = 1e-8
DINV_TOL = 1e-8

# antisymmetric 2 x 2 generator
J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


class RExtension:
    """
    D-invariant extension of the SLD span with its Sigma, tau and R
    matrices; `rank_one` holds (A, b) when r = d + 1.
    """

    d: int
    r: int
    basis: List[np.ndarray]
    sigma: np.ndarray
    tau: np.ndarray
    R: np.ndarray
    rank_one: Optional[Tuple[np.ndarray, np.ndarray]] = None
    closure_residual: float = 0.0

    def __init__(self, d: int, basis: List[np.ndarray], sigma: np.ndarray, tau: np.ndarray, R: np.ndarray):
        self.d = d
        self.r = len(basis)
        self.basis = basis
        self.sigma = sigma
        self.tau = tau
        self.R = R
        self.rank_one = None

    def __repr__(self) -> str:
        return f"RExtension(d={self.d}, r={self.r}, rank_one={self.rank_one is not None})"

    @property
    def r1(self) -> np.ndarray:
        return self.R[: self.d, : self.d]

    @property
    def r2(self) -> np.ndarray:
        """Lower-left (r - d) x d block."""
        return self.R[self.d:, : self.d]

    @property
    def r3(self) -> np.ndarray:
        return self.R[self.d:, self.d:]


class HolevoSolution:
    """
    Minimizer of the Holevo objective.
    - value: C^(H)
    - f_opt: (r - d) x d real matrix
    - Z_opt: Z(f_opt)
    - V_opt: real symmetric V >= Z_opt with Tr G V_opt = value
    - dual_value: certified lower value when available
    """

    value: float
    f_opt: np.ndarray
    Z_opt: np.ndarray
    V_opt: np.ndarray
    method: str
    iterations: int = 0
    dual_value: Optional[float] = None
    observables: Optional[List[np.ndarray]] = None

    def __init__(self, value: float, f_opt: np.ndarray, Z_opt: np.ndarray, V_opt: np.ndarray, method: str, iterations: int = 0):
        self.value = value
        self.f_opt = f_opt
        self.Z_opt = Z_opt
        self.V_opt = V_opt
        self.method = method
        self.iterations = iterations

    def __repr__(self) -> str:
        return f"HolevoSolution(value={self.value:.12g}, method={self.method})"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "method": self.method,
            "iterations": self.iterations,
            "dual_value": self.dual_value,
            "f_opt": self.f_opt.tolist(),
            "Z_opt": utils.complex_to_pairs(self.Z_opt),
            "V_opt": self.V_opt.tolist(),
        }


### Extension ###


def _orth_residual(x: np.ndarray, shadow: List[np.ndarray], rho) -> np.ndarray:
    """x minus its SLD-inner-product projection on an orthonormal list (two passes)."""
    v = x.copy()
    for _ in range(2):
        for q in shadow:
            v = v - sld_inner(q, v, rho) * q
    return v


def _sld_norm(x: np.ndarray, rho) -> float:
    return float(np.sqrt(max(sld_inner(x, x, rho), 0.0)))


def _orthonormalize(ops: List[np.ndarray], rho) -> List[np.ndarray]:
    shadow: List[np.ndarray] = []
    for i, op in enumerate(ops):
        v = _orth_residual(op, shadow, rho)
        n = _sld_norm(v, rho)
        if n <= 1e-10 * max(1.0, _sld_norm(op, rho)):
            raise DegenerateModel(f"operator {i} is linearly dependent on the preceding ones")
        shadow.append(v / n)
    return shadow


def _extension_matrices(m: ModelPoint, basis: List[np.ndarray]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    rho = m.rho.data
    b = np.stack(basis)
    sigma = utils.hermitian_part(np.einsum("pq,jqs,isp->ij", rho, b, b))
    tau = np.einsum("jpq,iqp->ij", m.tangent_array(), b)
    re_sigma = sigma.real
    cond = np.linalg.cond(re_sigma)
    if not np.isfinite(cond) or cond >= 1e12:
        log.error("Extension Gram matrix is singular (condition %.3e)", cond)
        raise DegenerateModel(f"extension Gram matrix is singular (condition {cond:.3e})")
    inv = np.linalg.inv(re_sigma)
    inv = 0.5 * (inv + inv.T)
    return sigma, tau, utils.hermitian_part(inv @ sigma @ inv)


def build_extension(m: ModelPoint, solver: Optional[SolverConfig] = None) -> RExtension:
    """
    Close the real SLD span under the commutation operator.

    Each basis element is mapped by D and the component orthogonal to the
    current span is appended (normalized) when its norm exceeds the closure
    threshold relative to the image norm. The first d elements stay the raw
    SLDs.
    """
    cfg = solver_or_default(solver)
    rho = m.rho
    slds = beta_log_derivative(m, 0.0).operators
    shadow = _orthonormalize(slds, rho)
    basis = list(slds)
    limit = m.dim * m.dim - 1
    residual = 0.0
    i = 0
    while i < len(basis):
        image = utils.hermitian_part(apply_commutation(rho, basis[i]))
        image_norm = _sld_norm(image, rho)
        res = _orth_residual(image, shadow, rho)
        res_norm = _sld_norm(res, rho)
        if res_norm > cfg.closure_tol * max(1.0, image_norm):
            if len(basis) >= limit:
                log.error("Closure exceeded %d dimensions", limit)
                raise InternalError(f"extension closure exceeded {limit} dimensions")
            v = res / res_norm
            shadow.append(v)
            basis.append(v)
            log.debug("Extension grew to r=%d (residual %.3e)", len(basis), res_norm)
        else:
            residual = max(residual, res_norm)
        i += 1

    sigma, tau, r = _extension_matrices(m, basis)
    ext = RExtension(m.d, basis, sigma, tau, r)
    ext.closure_residual = residual
    if ext.r == ext.d + 1:
        _attach_rank_one(ext, m)
    log.debug("Built extension: d=%d r=%d rank_one=%s", ext.d, ext.r, ext.rank_one is not None)
    return ext


def _attach_rank_one(ext: RExtension, m: ModelPoint) -> None:
    scale = max(1.0, float(np.max(np.abs(ext.R))))
    if np.max(np.abs(ext.r2.real)) > SHAPE_TOL * scale or abs(ext.r3[0, 0] - 1.0) > SHAPE_TOL:
        log.debug("Extension of size d+1 does not have the rank-one block shape")
        return
    b = -ext.r2.imag[0]
    nz = np.nonzero(np.abs(b) > 1e-12 * max(1.0, float(np.max(np.abs(b)))))[0]
    if nz.size and b[nz[0]] < 0:
        ext.basis[-1] = -ext.basis[-1]
        ext.sigma, ext.tau, ext.R = _extension_matrices(m, ext.basis)
        b = -ext.r2.imag[0]
    ext.rank_one = (ext.r1.copy(), b.copy())


def extended_fisher_inverse(ext: RExtension, beta: float) -> np.ndarray:
    """Re R + beta i Im R, the inverse beta Fisher matrix of the extended model."""
    return ext.R.real + 1j * beta * ext.R.imag


def fisher_inverse_from_extension(ext: RExtension, beta: float) -> np.ndarray:
    """J^(beta)^-1 of the original model as a Schur complement of the extended inverse."""
    full = extended_fisher_inverse(ext, beta)
    if ext.r == ext.d:
        return full
    return schur_complement(full, ext.d)


def extension_model(m: ModelPoint, ext: RExtension) -> ModelPoint:
    """
    Model whose SLDs are the extension basis: tangents (rho D_j + D_j rho)/2.
    """
    rho = m.rho.data
    tangents = [0.5 * (rho @ dj + dj @ rho) for dj in ext.basis]
    return ModelPoint(m.rho, tangents, f"{m.label} extended")


def rank_one_params(ext: RExtension, m: ModelPoint) -> Tuple[np.ndarray, np.ndarray]:
    """
    (A, b) with A = J^(S)^-1 + i Im J^(R)^-1 and J^(S)^-1 - Re J^(R)^-1 = b b^T.
    """
    if ext.r > ext.d + 1:
        raise NotRankOne(f"extension has r = {ext.r} > d + 1 = {ext.d + 1}")
    if ext.r == ext.d + 1:
        scale = max(1.0, float(np.max(np.abs(ext.R))))
        if np.max(np.abs(ext.r2.real)) > SHAPE_TOL * scale or abs(ext.r3[0, 0] - 1.0) > SHAPE_TOL:
            log.error("Extension of size d+1 lacks the rank-one block shape")
            raise NotRankOne("need Re R2 = 0 and R3 = 1 for a rank-one extension")
    s_inv = fisher_beta(m, 0.0).inverse().real
    r_inv = fisher_beta(m, 1.0).inverse()
    a = s_inv + 1j * r_inv.imag
    mm = s_inv - r_inv.real
    mm = 0.5 * (mm + mm.T)
    w, v = np.linalg.eigh(mm)
    norm = float(np.max(np.abs(w)))
    if norm <= 1e-12 * max(1.0, float(np.max(np.abs(s_inv)))):
        return a, np.zeros(ext.d)
    if w[0] < -SHAPE_TOL * norm or (len(w) > 1 and w[-2] > SHAPE_TOL * norm):
        log.error("J_S^-1 - Re J_R^-1 is not rank one: eigenvalues %s", w)
        raise NotRankOne("J^(S)^-1 - Re J^(R)^-1 is not positive of rank one")
    b = np.sqrt(w[-1]) * v[:, -1]
    nz = np.nonzero(np.abs(b) > 1e-12 * float(np.max(np.abs(b))))[0]
    if b[nz[0]] < 0:
        b = -b
    return a, b


### Objective ###


class HolevoObjective:
    """
    f -> Tr G Re Z(f) + Tr|sqrt(G) Im Z(f) sqrt(G)| for one extension and
    weight, with a smoothed variant and its gradient.
    """

    def __init__(self, g: WeightMatrix, ext: RExtension):
        if g.d != ext.d:
            raise InvalidInput(f"weight is {g.d}x{g.d} but the model has {ext.d} parameters")
        self.g = g
        self.ext = ext
        self.d = ext.d
        self.k = ext.r - ext.d
        self.r1 = ext.r1
        self.r2 = ext.r2
        self.r3 = ext.r3

    def z(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=float).reshape(self.k, self.d)
        z = self.r1 + self.r2.conj().T @ f + f.T @ self.r2 + f.T @ self.r3 @ f
        return utils.hermitian_part(z)

    def value_of_z(self, z: np.ndarray) -> float:
        s = self.g.sqrt
        return float(np.trace(self.g.entries @ z.real)) + nuclear_norm(s @ z.imag @ s)

    def __call__(self, f: np.ndarray) -> float:
        return self.value_of_z(self.z(f))

    def f_sld(self) -> np.ndarray:
        """-(Re R3)^-1 Re R2, the minimizer of Tr G Re Z(f)."""
        return -np.linalg.solve(self.r3.real, self.r2.real)

    def smoothed(self, x: np.ndarray, eps: float) -> Tuple[float, np.ndarray]:
        """
        Value and gradient with the nuclear norm replaced by Tr sqrt(K^T K + eps I).
        """
        f = x.reshape(self.k, self.d)
        z = self.z(f)
        s, gm = self.g.sqrt, self.g.entries
        kmat = s @ z.imag @ s
        w, v = np.linalg.eigh(kmat.T @ kmat + eps * np.eye(self.d))
        w = np.clip(w, eps, None)
        root = np.sqrt(w)
        val = float(np.trace(gm @ z.real)) + float(np.sum(root))
        omega = s @ (kmat @ ((v / root) @ v.T)) @ s
        grad = (
            2 * self.r2.real @ gm
            + 2 * self.r3.real @ f @ gm
            - 2 * (self.r2.imag + self.r3.imag @ f) @ omega
        )
        return val, grad.ravel()

    def dual_refine(self) -> Tuple[np.ndarray, float]:
        """
        Two-parameter case: maximize the concave dual over the scalar
        antisymmetric multiplier u in [-1, 1]; returns the primal point of the
        best multiplier and the dual value there.
        """
        s, gm = self.g.sqrt, self.g.entries
        sjs = s @ J2 @ s

        def f_of(u: float) -> np.ndarray:
            h = gm + 1j * u * sjs
            lhs = np.kron(h.T, self.r3).real
            rhs = -(self.r2 @ h).real.reshape(-1, order="F")
            sol = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
            return sol.reshape((self.k, self.d), order="F")

        def dual(u: float) -> float:
            h = gm + 1j * u * sjs
            return float(np.trace(h @ self.z(f_of(u))).real)

        res = minimize_scalar(lambda u: -dual(u), bounds=(-1.0, 1.0), method="bounded", options={"xatol": 1e-12})
        candidates = [float(res.x), -1.0, 0.0, 1.0]
        values = [dual(u) for u in candidates]
        best = int(np.argmax(values))
        log.debug("Dual refinement: u=%.10f dual=%.12g", candidates[best], values[best])
        return f_of(candidates[best]), values[best]


def _solution(obj: HolevoObjective, f: np.ndarray, method: str, iterations: int) -> HolevoSolution:
    z = obj.z(f)
    value = obj.value_of_z(z)
    _, v_opt = min_real_cov(obj.g, z)
    return HolevoSolution(value, f.reshape(obj.k, obj.d), z, v_opt, method, iterations)


def holevo_min_f(g: Weight, ext: RExtension, solver: Optional[SolverConfig] = None) -> HolevoSolution:
    """
    Holevo bound by smoothing continuation over f with BFGS inner solves,
    warm-started from the SLD-optimal point.
    """
    cfg = solver_or_default(solver)
    obj = HolevoObjective(as_weight(g), ext)
    if obj.k == 0:
        sol = _solution(obj, np.zeros((0, obj.d)), "closed", 0)
        log.debug("SLD span is D-invariant, C_H = %.12g", sol.value)
        return sol

    f_start = obj.f_sld()
    x = f_start.ravel()
    iterations = 0
    grad_norm = np.inf
    for eps in cfg.smoothing_schedule:
        res = minimize(
            obj.smoothed, x, args=(eps,), jac=True, method="BFGS",
            options={"gtol": cfg.grad_tol, "maxiter": cfg.max_inner_iter},
        )
        iterations += int(res.nit)
        if res.nit >= cfg.max_inner_iter:
            best = min(obj(res.x), obj(x))
            log.error("Smoothing stage eps=%g hit %d iterations", eps, cfg.max_inner_iter)
            raise NumericalFailure(
                f"smoothed solve did not converge within {cfg.max_inner_iter} iterations",
                best_value=best,
            )
        x = res.x
        grad_norm = float(np.linalg.norm(res.jac))
        log.debug("eps=%g: objective=%.12g |grad|=%.3e nit=%d", eps, obj(x), grad_norm, res.nit)

    candidates = [(obj(x), x.reshape(obj.k, obj.d), "min_f")]
    candidates.append((obj(f_start), f_start, "min_f"))
    dual_value = None
    if obj.d == 2:
        f_dual, dual_value = obj.dual_refine()
        candidates.append((obj(f_dual), f_dual, "min_f+dual"))
    elif obj.d > 2:
        # nonsmooth finish from the barrier SDP point
        try:
            f_sdp = holevo_sdp(obj.g, ext, cfg).f_opt
            candidates.append((obj(f_sdp), f_sdp, "min_f+sdp"))
        except NumericalFailure as e:
            log.warning("SDP finishing step failed (%s), keeping the smoothed point", e)
            if grad_norm > cfg.grad_tol:
                log.warning("Final smoothing stage stopped at |grad|=%.3e above %.1e", grad_norm, cfg.grad_tol)
    elif grad_norm > cfg.grad_tol:
        log.warning("Final smoothing stage stopped at |grad|=%.3e above %.1e", grad_norm, cfg.grad_tol)
    value, f_best, method = min(candidates, key=lambda c: c[0])
    sol = _solution(obj, f_best, method, iterations)
    sol.dual_value = dual_value
    log.info("Holevo (min f): C_H=%.12g after %d iterations", sol.value, iterations)
    return sol


def holevo_lower_sandwich(g: Weight, ext: RExtension) -> Tuple[float, float]:
    """
    (Tr G Re Z(f_S), objective at f_S): C^(S) and an upper estimate of C^(H).
    """
    obj = HolevoObjective(as_weight(g), ext)
    f = obj.f_sld() if obj.k else np.zeros((0, obj.d))
    z = obj.z(f)
    return float(np.trace(obj.g.entries @ z.real)), obj.value_of_z(z)


### Barrier SDP ###


class _BarrierProblem:
    """
    LMI M(x) = M0 + sum_k x_k A_k >= 0 with x = (upper triangle of V, f);
    M = [[V, (I f^T) sqrt(R)], [sqrt(R) (I; f), I_r]].
    """

    def __init__(self, g: WeightMatrix, ext: RExtension):
        d, r = ext.d, ext.r
        k = r - d
        n = d + r
        root = psd_sqrt(ext.R)
        m0 = np.zeros((n, n), dtype=complex)
        m0[d:, :d] = root[:, :d]
        m0[:d, d:] = root[:, :d].conj().T
        m0[d:, d:] = np.eye(r)
        mats, cost = [], []
        self.v_index = [(p, q) for p in range(d) for q in range(p, d)]
        for p, q in self.v_index:
            a = np.zeros((n, n), dtype=complex)
            a[p, q] = a[q, p] = 1.0
            mats.append(a)
            cost.append(g.entries[p, q] if p == q else 2 * g.entries[p, q])
        for i in range(k):
            for j in range(d):
                a = np.zeros((n, n), dtype=complex)
                a[d:, j] = root[:, d + i]
                a[j, d:] = root[:, d + i].conj()
                mats.append(a)
                cost.append(0.0)
        self.d, self.k, self.n = d, k, n
        self.m0 = m0
        self.mats = np.stack(mats)
        self.cost = np.array(cost)

    def lmi(self, x: np.ndarray) -> np.ndarray:
        return self.m0 + np.einsum("k,kij->ij", x, self.mats)

    def pack(self, v: np.ndarray, f: np.ndarray) -> np.ndarray:
        return np.concatenate([[v[p, q] for p, q in self.v_index], np.asarray(f).ravel()])

    def unpack(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        v = np.zeros((self.d, self.d))
        for val, (p, q) in zip(x, self.v_index):
            v[p, q] = v[q, p] = val
        f = x[len(self.v_index):].reshape(self.k, self.d)
        return v, f

    def barrier(self, x: np.ndarray, mu: float) -> Optional[float]:
        """Barrier objective, None outside the interior."""
        try:
            chol = np.linalg.cholesky(self.lmi(x))
        except np.linalg.LinAlgError:
            return None
        logdet = 2.0 * float(np.sum(np.log(np.diag(chol).real)))
        return float(self.cost @ x) - mu * logdet


def holevo_sdp(g: Weight, ext: RExtension, solver: Optional[SolverConfig] = None) -> HolevoSolution:
    """
    Holevo bound from the semidefinite program min Tr G V over the block LMI,
    by a damped Newton log-det barrier method.
    """
    cfg = solver_or_default(solver)
    w = as_weight(g)
    obj = HolevoObjective(w, ext)
    prob = _BarrierProblem(w, ext)

    f0 = obj.f_sld() if obj.k else np.zeros((0, obj.d))
    z0 = obj.z(f0)
    v0 = z0.real + (np.linalg.norm(z0, 2) + 1.0) * np.eye(obj.d)
    x = prob.pack(v0, f0)

    mu = cfg.mu_start
    newton_total = 0
    while True:
        for _ in range(cfg.max_newton_iter):
            m_inv = np.linalg.inv(prob.lmi(x))
            prods = np.einsum("ij,kjl->kil", m_inv, prob.mats)
            grad = prob.cost - mu * np.einsum("kii->k", prods).real
            hess = mu * np.einsum("kij,lji->kl", prods, prods).real
            try:
                step = -np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                step = -np.linalg.lstsq(hess, grad, rcond=None)[0]
            decrement = float(-grad @ step)
            current = prob.barrier(x, mu)
            if current is None:
                raise InternalError("barrier iterate left the interior")
            if decrement < 1e-13 * max(1.0, abs(float(prob.cost @ x))):
                break
            t = 1.0
            while True:
                trial = x + t * step
                value = prob.barrier(trial, mu)
                if value is not None and value <= current - 0.25 * t * decrement:
                    break
                t *= 0.5
                if t < 1e-14:
                    v_cur, f_cur = prob.unpack(x)
                    log.error("Barrier line search stalled at mu=%g", mu)
                    raise NumericalFailure(
                        f"barrier method lost strict feasibility at mu={mu:g}",
                        best_value=float(np.trace(w.entries @ v_cur)),
                    )
            x = trial
            newton_total += 1
        else:
            log.warning("Newton centering did not converge at mu=%g", mu)
        log.debug("mu=%g: Tr G V=%.12g newton=%d", mu, float(prob.cost @ x), newton_total)
        if mu <= cfg.mu_stop:
            break
        mu *= cfg.mu_factor

    _, f = prob.unpack(x)
    sol = _solution(obj, f, "sdp", newton_total)
    log.info("Holevo (sdp): C_H=%.12g after %d Newton steps", sol.value, newton_total)
    return sol


### Observables and diagnostics ###


def optimal_observables(m: ModelPoint, g: Weight, ext: RExtension) -> List[np.ndarray]:
    """
    Observables B_i = sum_j F_ji D_j attaining the Holevo bound, with
    F = (Re Sigma)^-1 (I; f) and f built from the maximizing beta.
    """
    w = as_weight(g)
    if w.d != m.d:
        raise InvalidInput(f"weight is {w.d}x{w.d} but the model has {m.d} parameters")
    if ext.r == ext.d:
        f_row = np.zeros((0, ext.d))
    elif ext.d == 2 and ext.r == 3 and ext.rank_one is not None:
        a, b = ext.rank_one
        _, beta_star = max_beta_closed_form(w, a, b)
        s, s_inv = w.sqrt, w.inv_sqrt
        # orientation of the generator follows the sign of Im A
        k_a = (s @ a.imag @ s)[1, 0]
        f_col = np.sign(k_a) * beta_star * (s_inv @ J2 @ s @ b)
        f_row = f_col.reshape(1, 2)
    else:
        raise InvalidInput("optimal observables need d = 2 with a rank-one extension, or r = d")
    re_sigma_inv = np.linalg.inv(ext.sigma.real)
    f_mat = re_sigma_inv @ np.vstack([np.eye(ext.d), f_row])
    return [
        utils.hermitian_part(sum(f_mat[j, i] * ext.basis[j] for j in range(ext.r)))
        for i in range(ext.d)
    ]


def observable_z(m: ModelPoint, observables: List[np.ndarray]) -> np.ndarray:
    """Z(B)_ij = Tr rho B_j B_i."""
    rho = m.rho.data
    return np.array([[np.trace(rho @ bj @ bi) for bj in observables] for bi in observables])


def unbiasedness_error(m: ModelPoint, observables: List[np.ndarray]) -> float:
    """max |Tr d_i rho B_j - delta_ij|"""
    t = np.array([[np.trace(ti.data @ bj).real for bj in observables] for ti in m.tangents])
    return float(np.max(np.abs(t - np.eye(m.d))))


def _span_residual(ops: List[np.ndarray], rho) -> float:
    shadow = _orthonormalize(ops, rho)
    worst = 0.0
    for q in shadow:
        image = utils.hermitian_part(apply_commutation(rho, q))
        worst = max(worst, _sld_norm(_orth_residual(image, shadow, rho), rho))
    return worst


def _complex_span_residual(targets: List[np.ndarray], span: List[np.ndarray], rho) -> float:
    """Largest relative distance of a target from the complex span, SLD inner product."""
    basis: List[np.ndarray] = []
    for op in span:
        v = op.astype(complex)
        for q in basis:
            v = v - inner_beta(q, v, rho, 0.0) * q
        n = float(np.sqrt(max(inner_beta(v, v, rho, 0.0).real, 0.0)))
        basis.append(v / n)
    worst = 0.0
    for y in targets:
        v = y.astype(complex)
        for _ in range(2):
            for q in basis:
                v = v - inner_beta(q, v, rho, 0.0) * q
        ny = float(np.sqrt(max(inner_beta(y, y, rho, 0.0).real, 0.0)))
        nv = float(np.sqrt(max(inner_beta(v, v, rho, 0.0).real, 0.0)))
        worst = max(worst, nv / max(ny, 1e-300))
    return worst


class DinvReport:
    """
    D-invariance diagnostics of a model.
    - tangent_residual: (i) span of the tangents
    - sld_residual: (ii) span of the SLDs
    - beta_span_residual: (iii) beta = 0.5 derivatives outside the complex SLD span
    - fisher_identity_error: (iv) beta Fisher inverse identity over beta in {0.25, 0.5, 0.75, 1}
    """

    tangent_residual: float
    sld_residual: float
    beta_span_residual: float
    fisher_identity_error: float
    tol: float = DINV_TOL

    def __init__(self, tangent_residual: float, sld_residual: float, beta_span_residual: float, fisher_identity_error: float):
        self.tangent_residual = tangent_residual
        self.sld_residual = sld_residual
        self.beta_span_residual = beta_span_residual
        self.fisher_identity_error = fisher_identity_error

    @property
    def invariant(self) -> bool:
        return all(
            v < self.tol
            for v in (self.tangent_residual, self.sld_residual, self.beta_span_residual, self.fisher_identity_error)
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tangent_residual": self.tangent_residual,
            "sld_residual": self.sld_residual,
            "beta_span_residual": self.beta_span_residual,
            "fisher_identity_error": self.fisher_identity_error,
            "invariant": self.invariant,
        }


def fisher_identity_error(m: ModelPoint, betas=(0.25, 0.5, 0.75, 1.0)) -> float:
    """
    max |J^(beta)^-1 - J^(S)^-1 (Re Z + beta i Im Z) J^(S)^-1| over beta.
    """
    slds = beta_log_derivative(m, 0.0).operators
    rho = m.rho.data
    z = np.array([[np.trace(rho @ lj @ li) for lj in slds] for li in slds])
    s_inv = fisher_beta(m, 0.0).inverse().real
    worst = 0.0
    for beta in betas:
        predicted = s_inv @ (z.real + 1j * beta * z.imag) @ s_inv
        worst = max(worst, float(np.max(np.abs(fisher_beta(m, beta).inverse() - predicted))))
    return worst


def dinv_check(m: ModelPoint) -> DinvReport:
    rho = m.rho
    slds = beta_log_derivative(m, 0.0).operators
    report = DinvReport(
        tangent_residual=_span_residual([t.data for t in m.tangents], rho),
        sld_residual=_span_residual(slds, rho),
        beta_span_residual=_complex_span_residual(beta_log_derivative(m, 0.5).operators, slds, rho),
        fisher_identity_error=fisher_identity_error(m),
    )
    log.debug("D-invariance diagnostics: %s", report.to_dict())
    return report
