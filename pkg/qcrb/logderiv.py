"""
Logarithmic derivatives and Fisher information matrices.

All solves are elementwise in the eigenbasis of rho: with tangents
T_i = U^H d_i rho U, the beta logarithmic derivative has entries
2 T_i[j, k] / ((1 + beta) l_j + (1 - beta) l_k).
"""

from typing import Callable, List, Optional, Sequence

import numpy as np

import qcrb.utils as utils
from qcrb.errors import DegenerateModel, InvalidInput
from qcrb.matcore import HermitianMatrix, as_array, eig_hermitian
from qcrb.model import ModelPoint

log = utils.get_logger("qcrb.LogDeriv")

KINDS = ("SLD", "RLD", "BETA", "MONOTONE", "CLASSICAL")

# condition number above which a Fisher matrix is treated as singular
MAX_FISHER_COND = 1e12


class FisherMatrix:
    """
    Hermitian d x d Fisher information matrix tagged with the metric it
    came from.
    """

    d: int
    entries: np.ndarray
    kind: str
    beta: Optional[float] = None
    label: str = ""

    def __init__(
        self,
        entries: np.ndarray,
        kind: str,
        beta: Optional[float] = None,
        label: str = "",
        tol: float = 1e-10,
    ):
        if kind not in KINDS:
            raise InvalidInput(f"unknown Fisher kind '{kind}'")
        j = np.atleast_2d(np.asarray(entries, dtype=complex))
        scale = max(1.0, float(np.max(np.abs(j))))
        drift = float(np.max(np.abs(j - j.conj().T)))
        if drift > tol * scale:
            log.error("%s Fisher matrix is not Hermitian (drift %.3e)", kind, drift)
            raise InvalidInput(f"{kind} Fisher matrix is not Hermitian (drift {drift:.3e})")
        j = utils.hermitian_part(j)
        if kind in ("SLD", "CLASSICAL"):
            j = j.real.astype(complex)
        self.d = j.shape[0]
        self.entries = j
        self.entries.setflags(write=False)
        self.kind = kind
        self.beta = beta
        self.label = label

    def __repr__(self) -> str:
        return f"FisherMatrix({self.tag}, d={self.d})"

    @property
    def tag(self) -> str:
        if self.kind == "BETA":
            return f"BETA({self.beta:g})"
        if self.kind == "MONOTONE":
            return f"MONOTONE({self.label})"
        return self.kind

    @property
    def real(self) -> np.ndarray:
        return self.entries.real

    @property
    def imag(self) -> np.ndarray:
        return self.entries.imag

    def min_eigenvalue(self) -> float:
        return float(eig_hermitian(self.entries)[0][0])

    def inverse(self) -> np.ndarray:
        """
        Inverse of the matrix; DegenerateModel when it is numerically singular.
        """
        cond = np.linalg.cond(self.entries)
        if not np.isfinite(cond) or cond >= MAX_FISHER_COND:
            log.error("%s Fisher matrix is singular (condition %.3e)", self.tag, cond)
            raise DegenerateModel(f"{self.tag} Fisher matrix is singular (condition {cond:.3e})")
        inv = np.linalg.inv(self.entries)
        return utils.hermitian_part(inv)


class LogDerivativeSet:
    """
    The d beta logarithmic derivatives of a model; Hermitian when beta = 0.
    """

    beta: float
    operators: List[np.ndarray]

    def __init__(self, beta: float, operators: Sequence[np.ndarray]):
        self.beta = beta
        self.operators = [np.asarray(op) for op in operators]

    def __len__(self) -> int:
        return len(self.operators)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.operators[i]

    def residual(self, m: ModelPoint) -> float:
        """
        max_i || d_i rho - (1 + beta)/2 rho L_i - (1 - beta)/2 L_i rho ||
        """
        rho = m.rho.data
        b = self.beta
        worst = 0.0
        for t, op in zip(m.tangents, self.operators):
            res = t.data - 0.5 * (1 + b) * rho @ op - 0.5 * (1 - b) * op @ rho
            worst = max(worst, float(np.linalg.norm(res)))
        return worst

    def as_hermitian(self) -> List[HermitianMatrix]:
        if self.beta != 0:
            raise InvalidInput("only the SLD set (beta = 0) is Hermitian")
        return [HermitianMatrix(op, tol=1e-10) for op in self.operators]


def _check_beta(beta: float) -> None:
    if not -1.0 <= beta <= 1.0:
        raise InvalidInput(f"beta must lie in [-1, 1], got {beta}")


def beta_kernel(eigenvalues: np.ndarray, beta: float) -> np.ndarray:
    lj = eigenvalues[:, None]
    lk = eigenvalues[None, :]
    return 2.0 / ((1 + beta) * lj + (1 - beta) * lk)


def beta_log_derivative(m: ModelPoint, beta: float) -> LogDerivativeSet:
    _check_beta(beta)
    kernel = beta_kernel(m.rho.eigenvalues, beta)
    u = m.rho.eigenvectors
    ops = [u @ (kernel * t) @ u.conj().T for t in m.eigen_tangents]
    if beta == 0:
        ops = [utils.hermitian_part(op) for op in ops]
    return LogDerivativeSet(beta, ops)


def sld(m: ModelPoint) -> List[np.ndarray]:
    return beta_log_derivative(m, 0.0).operators


def fisher_from_kernel(eigen_tangents: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """
    J_ij = Tr d_i rho K(d_j rho) = sum_pq T_i[p, q] K[q, p] T_j[q, p]
    """
    return np.einsum("ipq,qp,jqp->ij", eigen_tangents, kernel, eigen_tangents)


def fisher_beta(m: ModelPoint, beta: float) -> FisherMatrix:
    """
    beta Fisher information J_ij = Tr d_i rho L_j^(beta); SLD at 0, RLD at 1.
    Negative beta gives the transpose of J^(|beta|).
    """
    _check_beta(beta)
    j = fisher_from_kernel(m.eigen_tangents, beta_kernel(m.rho.eigenvalues, beta))
    if beta == 0:
        return FisherMatrix(j, "SLD", 0.0)
    if beta == 1:
        return FisherMatrix(j, "RLD", 1.0)
    return FisherMatrix(j, "BETA", beta)


def fisher_sld(m: ModelPoint) -> FisherMatrix:
    return fisher_beta(m, 0.0)


def fisher_rld(m: ModelPoint) -> FisherMatrix:
    return fisher_beta(m, 1.0)


def monotone_kernel(eigenvalues: np.ndarray, p_fn: Callable[[float], float]) -> np.ndarray:
    """
    1 / (l_k P(l_j / l_k)) for every eigenvalue pair.
    """
    lj = eigenvalues[:, None]
    lk = eigenvalues[None, :]
    ratios = lj / lk
    values = np.vectorize(p_fn, otypes=[float])(ratios)
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise InvalidInput("monotone function must be positive on the eigenvalue ratios")
    return 1.0 / (lk * values)


def fisher_monotone(
    m: ModelPoint, p_fn: Callable[[float], float], label: str = "P"
) -> FisherMatrix:
    """
    Fisher matrix of the monotone metric generated by P.

    P is trusted to be operator monotone; only P(1) = 1 and positivity on
    the spectrum ratios are checked.
    """
    p1 = float(p_fn(1.0))
    if abs(p1 - 1.0) > 1e-12:
        raise InvalidInput(f"monotone function must satisfy P(1) = 1, got {p1!r}")
    kernel = monotone_kernel(m.rho.eigenvalues, p_fn)
    j = fisher_from_kernel(m.eigen_tangents, kernel)
    return FisherMatrix(j, "MONOTONE", label=label)


def beta_from_monotone(p_fn: Callable[[float], float], h: float = 1e-6) -> float:
    """beta = 2 P'(1) - 1 by central differences."""
    deriv = (p_fn(1.0 + h) - p_fn(1.0 - h)) / (2 * h)
    return float(2 * deriv - 1)


### Classical measurements ###


def validate_povm(povm: Sequence[np.ndarray], dim: int) -> List[np.ndarray]:
    if len(povm) == 0:
        raise InvalidInput("POVM has no elements")
    elems = []
    for i, e in enumerate(povm):
        e = np.asarray(as_array(e), dtype=complex)
        if e.shape != (dim, dim):
            raise InvalidInput(f"POVM element {i} has shape {e.shape}, expected ({dim}, {dim})")
        try:
            h = HermitianMatrix(e, tol=1e-9)
        except InvalidInput as err:
            raise InvalidInput(f"POVM element {i} is not Hermitian") from err
        w, _ = eig_hermitian(h)
        if w[0] < -1e-10:
            raise InvalidInput(f"POVM element {i} is not positive (min eigenvalue {w[0]:.3e})")
        elems.append(h.data)
    total = sum(elems)
    if np.max(np.abs(total - np.eye(dim))) > 1e-9:
        raise InvalidInput("POVM elements do not sum to the identity")
    return elems


def outcome_statistics(m: ModelPoint, povm: Sequence[np.ndarray]):
    """
    Probabilities p_x = Tr rho M_x and derivatives Tr d_i rho M_x of the
    supported outcomes, plus the index of each kept outcome.
    """
    elems = validate_povm(povm, m.dim)
    rho = m.rho.data
    probs, grads, kept = [], [], []
    for x, e in enumerate(elems):
        p = float(np.trace(rho @ e).real)
        g = np.array([np.trace(t.data @ e).real for t in m.tangents])
        if p < 1e-12:
            if np.max(np.abs(g)) > 1e-9:
                raise InvalidInput(f"outcome {x} has zero probability but nonzero derivative")
            continue
        probs.append(p)
        grads.append(g)
        kept.append(x)
    return np.array(probs), np.array(grads).reshape(len(probs), m.d), kept


def classical_fisher(m: ModelPoint, povm: Sequence[np.ndarray]) -> FisherMatrix:
    """
    J^(M)_ij = sum_x (Tr d_i rho M_x)(Tr d_j rho M_x) / Tr rho M_x
    """
    probs, grads, _ = outcome_statistics(m, povm)
    j = np.einsum("x,xi,xj->ij", 1.0 / probs, grads, grads) if len(probs) else np.zeros((m.d, m.d))
    return FisherMatrix(j, "CLASSICAL")


def locally_unbiased_estimator(
    m: ModelPoint, povm: Sequence[np.ndarray], theta0: Optional[Sequence[float]] = None
) -> np.ndarray:
    """
    Estimate map theta(x) = theta0 + J^(M)^-1 d log p(x), one row per POVM
    outcome; rows of unsupported outcomes are set to theta0.
    """
    theta0 = np.zeros(m.d) if theta0 is None else np.asarray(theta0, dtype=float)
    probs, grads, kept = outcome_statistics(m, povm)
    j_inv = classical_fisher(m, povm).inverse().real
    estimates = np.tile(theta0, (len(povm), 1))
    for p, g, x in zip(probs, grads, kept):
        estimates[x] = theta0 + j_inv @ (g / p)
    return estimates


def estimator_covariance(
    m: ModelPoint,
    povm: Sequence[np.ndarray],
    estimates: np.ndarray,
    theta0: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """
    V_ij = sum_x p(x) (theta_i(x) - theta0_i)(theta_j(x) - theta0_j)
    """
    theta0 = np.zeros(m.d) if theta0 is None else np.asarray(theta0, dtype=float)
    elems = validate_povm(povm, m.dim)
    probs = np.array([np.trace(m.rho.data @ e).real for e in elems])
    dev = np.asarray(estimates, dtype=float) - theta0
    return np.einsum("x,xi,xj->ij", probs, dev, dev)
