"""
Dense complex Hermitian linear algebra for the bound computations.

Superoperators act on dim x dim matrices through the column-stacking
vectorization vec(A X B) = (B^T kron A) vec(X). Every rho-dependent map is
built in the eigenbasis of rho as an elementwise kernel and conjugated back.
"""

from typing import Optional, Tuple, Union

import numpy as np
import scipy.linalg as sla

import qcrb.utils as utils
from qcrb.config import DEFAULT_SOLVER
from qcrb.errors import (
    InvalidInput,
    InvalidWeight,
    NumericalFailure,
    SingularBlock,
    SingularState,
)

log = utils.get_logger("qcrb.MatCore")

ArrayLike = Union[np.ndarray, "HermitianMatrix", list]

# largest condition number accepted for a block that gets inverted
MAX_BLOCK_COND = 1e12


def as_array(x: ArrayLike) -> np.ndarray:
    if isinstance(x, HermitianMatrix):
        return x.data
    if isinstance(x, DensityMatrix):
        return x.data
    return np.asarray(x)


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape((dim, dim), order="F")


class HermitianMatrix:
    """
    Complex square matrix equal to its conjugate transpose.

    Inputs whose relative drift max|X - X^H| / max|X| is below `tol` are
    symmetrized to (X + X^H)/2; larger drift is rejected.
    """

    dim: int
    data: np.ndarray

    def __init__(self, entries: ArrayLike, tol: Optional[float] = None):
        x = np.array(as_array(entries), dtype=complex)
        if x.ndim != 2 or x.shape[0] != x.shape[1] or x.shape[0] == 0:
            raise InvalidInput(f"hermitian matrix must be square, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InvalidInput("hermitian matrix has non-finite entries")
        tol = DEFAULT_SOLVER.herm_tol if tol is None else tol
        scale = np.max(np.abs(x))
        drift = np.max(np.abs(x - x.conj().T))
        if scale > 0 and drift > tol * scale:
            raise InvalidInput(f"hermiticity drift {drift / scale:.3e} exceeds {tol:.1e}")
        self.data = utils.hermitian_part(x)
        self.data.setflags(write=False)
        self.dim = x.shape[0]

    def __repr__(self) -> str:
        return f"HermitianMatrix(dim={self.dim})"

    def trace(self) -> float:
        return float(np.trace(self.data).real)

    def to_list(self) -> list:
        return utils.complex_to_pairs(self.data)


class DensityMatrix:
    """
    Strictly positive unit-trace Hermitian matrix with its eigensystem cached.
    """

    base: HermitianMatrix
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __init__(
        self,
        entries: ArrayLike,
        herm_tol: Optional[float] = None,
        trace_tol: Optional[float] = None,
        floor: Optional[float] = None,
    ):
        base = entries if isinstance(entries, HermitianMatrix) else HermitianMatrix(entries, herm_tol)
        trace_tol = DEFAULT_SOLVER.trace_tol if trace_tol is None else trace_tol
        floor = DEFAULT_SOLVER.positivity_floor if floor is None else floor
        tr = base.trace()
        if abs(tr - 1.0) > trace_tol:
            raise InvalidInput(f"trace of density matrix is {tr!r}, expected 1")
        w, u = eig_hermitian(base)
        if w[0] < floor:
            raise SingularState(
                f"smallest eigenvalue {w[0]:.3e} is below the positivity floor {floor:.1e}"
            )
        self.base = base
        self.eigenvalues = w
        self.eigenvectors = u
        self.eigenvalues.setflags(write=False)
        self.eigenvectors.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def data(self) -> np.ndarray:
        return self.base.data

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim}, min_eig={self.eigenvalues[0]:.3e})"

    def to_eigenbasis(self, x: ArrayLike) -> np.ndarray:
        u = self.eigenvectors
        return u.conj().T @ as_array(x) @ u

    def from_eigenbasis(self, x: np.ndarray) -> np.ndarray:
        u = self.eigenvectors
        return u @ x @ u.conj().T

    def apply_kernel(self, kernel: np.ndarray, x: ArrayLike) -> np.ndarray:
        """
        X -> U (kernel * (U^H X U)) U^H, the elementwise map in the eigenbasis
        """
        return self.from_eigenbasis(kernel * self.to_eigenbasis(x))


class Superoperator:
    """
    Linear map on dim x dim matrices stored as a dim^2 x dim^2 matrix
    acting on column-stacked vectors.
    """

    dim: int
    matrix: np.ndarray

    def __init__(self, matrix: np.ndarray):
        m = np.array(matrix, dtype=complex)
        n = int(round(np.sqrt(m.shape[0])))
        if m.ndim != 2 or m.shape[0] != m.shape[1] or n * n != m.shape[0]:
            raise InvalidInput(f"superoperator matrix must be dim^2 x dim^2, got {m.shape}")
        self.dim = n
        self.matrix = m
        self.matrix.setflags(write=False)

    def __repr__(self) -> str:
        return f"Superoperator(dim={self.dim})"

    def apply(self, x: ArrayLike) -> np.ndarray:
        x = as_array(x)
        if x.shape != (self.dim, self.dim):
            raise InvalidInput(f"operand shape {x.shape} does not match dim {self.dim}")
        return unvec(self.matrix @ vec(x), self.dim)

    def solve(self, y: ArrayLike) -> np.ndarray:
        """Return X with apply(X) = Y."""
        y = as_array(y)
        try:
            return unvec(np.linalg.solve(self.matrix, vec(y)), self.dim)
        except np.linalg.LinAlgError as e:
            raise SingularBlock(f"superoperator is not invertible: {e}") from e

    def norm(self) -> float:
        """Largest singular value."""
        return float(np.linalg.norm(self.matrix, 2))


class WeightMatrix:
    """
    Real symmetric positive definite d x d weight G, with sqrt(G) and its
    inverse cached.
    """

    d: int
    entries: np.ndarray
    sqrt: np.ndarray
    inv_sqrt: np.ndarray

    def __init__(self, entries: ArrayLike, tol: Optional[float] = None):
        g = np.array(as_array(entries))
        if np.iscomplexobj(g):
            if np.max(np.abs(g.imag)) > 0:
                raise InvalidWeight("weight matrix must be real")
            g = g.real
        g = np.atleast_2d(np.asarray(g, dtype=float))
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise InvalidWeight(f"weight matrix must be square, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise InvalidWeight("weight matrix has non-finite entries")
        tol = DEFAULT_SOLVER.herm_tol if tol is None else tol
        scale = np.max(np.abs(g))
        if scale == 0 or np.max(np.abs(g - g.T)) > tol * scale:
            raise InvalidWeight("weight matrix must be symmetric and nonzero")
        g = 0.5 * (g + g.T)
        w, v = sla.eigh(g)
        if w[0] <= 0:
            raise InvalidWeight(f"weight matrix is not positive definite (min eigenvalue {w[0]:.3e})")
        self.d = g.shape[0]
        self.entries = g
        self.sqrt = (v * np.sqrt(w)) @ v.T
        self.inv_sqrt = (v / np.sqrt(w)) @ v.T
        for a in (self.entries, self.sqrt, self.inv_sqrt):
            a.setflags(write=False)

    def __repr__(self) -> str:
        return f"WeightMatrix(d={self.d})"

    def scaled(self, s: float) -> "WeightMatrix":
        return WeightMatrix(s * self.entries)

    @classmethod
    def identity(cls, d: int) -> "WeightMatrix":
        return cls(np.eye(d))


def as_weight(g: Union[WeightMatrix, ArrayLike]) -> WeightMatrix:
    return g if isinstance(g, WeightMatrix) else WeightMatrix(g)


### Operations ###


def eig_hermitian(x: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix.
    """
    a = as_array(x)
    try:
        w, u = sla.eigh(a)
    except (np.linalg.LinAlgError, ValueError) as e:
        log.error("Hermitian eigensolver failed: %s", e)
        raise NumericalFailure(f"eigendecomposition did not converge: {e}") from e
    return np.array(w, dtype=float), np.array(u)


def psd_sqrt(x: ArrayLike) -> np.ndarray:
    """
    Hermitian PSD square root; tiny negative eigenvalues are clipped to 0.
    """
    w, u = eig_hermitian(x)
    return (u * np.sqrt(np.clip(w, 0.0, None))) @ u.conj().T


def abs_matrix(m: ArrayLike) -> np.ndarray:
    """
    |M| = sqrt(M^H M); real for real input.
    """
    m = as_array(m)
    out = psd_sqrt(m.conj().T @ m)
    return out.real if np.isrealobj(m) else out


def nuclear_norm(m: ArrayLike) -> float:
    return float(np.sum(sla.svdvals(as_array(m))))


def weighted_abs_trace(g: Union[WeightMatrix, ArrayLike], m: ArrayLike) -> float:
    """
    Tr|sqrt(G) M sqrt(G)|, the nuclear norm of the weighted matrix.
    """
    g = as_weight(g)
    m = as_array(m)
    if m.shape != (g.d, g.d):
        raise InvalidInput(f"matrix shape {m.shape} does not match weight size {g.d}")
    return nuclear_norm(g.sqrt @ m @ g.sqrt)


def min_real_cov(
    g: Union[WeightMatrix, ArrayLike], j: ArrayLike, psd_tol: float = 1e-10
) -> Tuple[float, np.ndarray]:
    """
    Minimize Tr G V over real symmetric V >= J.

    The minimum is Tr G Re J + Tr|sqrt(G) Im J sqrt(G)|, attained at
    V* = Re J + sqrt(G)^-1 |sqrt(G) Im J sqrt(G)| sqrt(G)^-1.
    """
    g = as_weight(g)
    j = np.asarray(as_array(j), dtype=complex)
    if j.shape != (g.d, g.d):
        raise InvalidInput(f"matrix shape {j.shape} does not match weight size {g.d}")
    if np.max(np.abs(j - j.conj().T)) > 1e-10 * max(1.0, np.max(np.abs(j))):
        raise InvalidInput("J must be Hermitian")
    j = utils.hermitian_part(j)
    w, _ = eig_hermitian(j)
    if w[0] < -psd_tol * max(1.0, abs(w[-1])):
        raise InvalidInput(f"J is not positive semidefinite (min eigenvalue {w[0]:.3e})")
    re_j, im_j = j.real, j.imag
    weighted_im = g.sqrt @ im_j @ g.sqrt
    v_star = re_j + g.inv_sqrt @ abs_matrix(weighted_im) @ g.inv_sqrt
    v_star = 0.5 * (v_star + v_star.T)
    value = float(np.trace(g.entries @ re_j)) + nuclear_norm(weighted_im)
    return value, v_star


def schur_complement(a: ArrayLike, p: int) -> np.ndarray:
    """
    A/A3 = A1 - A2* A3^-1 A2 for A = [[A1, A2*], [A2, A3]] with A1 of size p.
    """
    a = np.asarray(as_array(a))
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n or not 0 < p < n:
        raise InvalidInput(f"cannot split a {a.shape} matrix at block size {p}")
    a1, a2s, a2, a3 = a[:p, :p], a[:p, p:], a[p:, :p], a[p:, p:]
    cond = np.linalg.cond(a3)
    if not np.isfinite(cond) or cond >= MAX_BLOCK_COND:
        raise SingularBlock(f"lower block is numerically singular (condition {cond:.3e})")
    return a1 - a2s @ np.linalg.solve(a3, a2)


### rho superoperators ###


def _pair_sums(rho: DensityMatrix) -> Tuple[np.ndarray, np.ndarray]:
    lam = rho.eigenvalues
    return lam[:, None], lam[None, :]


def kernel_superop(rho: DensityMatrix, kernel: np.ndarray) -> Superoperator:
    """
    Superoperator X -> U (kernel * (U^H X U)) U^H in column-stacked form.
    """
    u = rho.eigenvectors
    to_eig = np.kron(u.T, u.conj().T)
    from_eig = np.kron(u.conj(), u)
    return Superoperator(from_eig @ (vec(kernel)[:, None] * to_eig))


def commutation_kernel(rho: DensityMatrix) -> np.ndarray:
    lj, lk = _pair_sums(rho)
    return 1j * (lk - lj) / (lj + lk)


def commutation_superop(rho: DensityMatrix) -> Superoperator:
    """
    Commutation operator D with D(X) rho + rho D(X) = i (X rho - rho X).
    """
    _check_state(rho)
    return kernel_superop(rho, commutation_kernel(rho))


def apply_commutation(rho: DensityMatrix, x: ArrayLike) -> np.ndarray:
    return rho.apply_kernel(commutation_kernel(rho), x)


def beta_shift_kernel(rho: DensityMatrix, beta: float) -> np.ndarray:
    """
    Kernel of I + beta i D: ((1+beta) l_j + (1-beta) l_k) / (l_j + l_k).
    """
    lj, lk = _pair_sums(rho)
    return ((1 + beta) * lj + (1 - beta) * lk) / (lj + lk)


def beta_shift_superop(rho: DensityMatrix, beta: float) -> Superoperator:
    _check_state(rho)
    return kernel_superop(rho, beta_shift_kernel(rho, beta))


def left_mult_superop(rho: DensityMatrix) -> Superoperator:
    return Superoperator(np.kron(np.eye(rho.dim), rho.data))


def right_mult_superop(rho: DensityMatrix) -> Superoperator:
    return Superoperator(np.kron(rho.data.T, np.eye(rho.dim)))


def symmetrization_superop(rho: DensityMatrix) -> Superoperator:
    """(L_rho + R_rho) / 2, built from the kernel (l_j + l_k) / 2."""
    lj, lk = _pair_sums(rho)
    return kernel_superop(rho, 0.5 * (lj + lk))


def inner_beta(x: ArrayLike, y: ArrayLike, rho: DensityMatrix, beta: float) -> complex:
    """
    <X, Y>^(beta) = 1/2 Tr X^H {(1+beta) rho Y + (1-beta) Y rho}
    """
    if not -1.0 <= beta <= 1.0:
        raise InvalidInput(f"beta must lie in [-1, 1], got {beta}")
    x, y = as_array(x), as_array(y)
    if x.shape != (rho.dim, rho.dim) or y.shape != (rho.dim, rho.dim):
        raise InvalidInput(
            f"operand shapes {x.shape}, {y.shape} do not match state dimension {rho.dim}"
        )
    r = rho.data
    return complex(0.5 * np.trace(x.conj().T @ ((1 + beta) * r @ y + (1 - beta) * y @ r)))


def sld_inner(x: ArrayLike, y: ArrayLike, rho: DensityMatrix) -> float:
    """Real part of <X, Y>^(0); the real inner product on Hermitian operators."""
    return inner_beta(x, y, rho, 0.0).real


def _check_state(rho: DensityMatrix) -> None:
    if rho.eigenvalues[0] < DEFAULT_SOLVER.positivity_floor:
        raise SingularState(f"state eigenvalue {rho.eigenvalues[0]:.3e} below the positivity floor")
