"""
Quantum statistical models at a parameter point: a strictly positive state
plus its d tangent directions.

Also holds the two worked example families, numeric tangents for
user-supplied families, tensor powers, random instances and the JSON model
file format.
"""

import functools
import json
import os
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

import qcrb.utils as utils
from qcrb.config import DEFAULT_SOLVER
from qcrb.errors import (
    FormatError,
    InvalidInput,
    InvalidModel,
    NumericalFailure,
    SingularState,
)
from qcrb.matcore import DensityMatrix, HermitianMatrix, WeightMatrix, as_array

log = utils.get_logger("qcrb.Model")

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

# largest Hilbert space dimension handled by the dense kernels
MAX_DIM = 64

TANGENT_TOL = 1e-9
INDEPENDENCE_FLOOR = 1e-10


class ModelPoint:
    """
    State rho and tangents d_i rho at one parameter point.

    Tangents must be Hermitian and traceless within 1e-9 and linearly
    independent under the SLD inner product. Violations raise InvalidModel
    naming the failed invariant.
    """

    rho: DensityMatrix
    tangents: List[HermitianMatrix]
    d: int
    label: str

    def __init__(
        self,
        rho: Union[DensityMatrix, np.ndarray],
        tangents: Sequence[Union[HermitianMatrix, np.ndarray]],
        label: str = "",
    ):
        if not isinstance(rho, DensityMatrix):
            rho = _as_density(rho)
        if len(tangents) == 0:
            raise InvalidModel("shape", "a model needs at least one tangent")
        checked: List[HermitianMatrix] = []
        for i, t in enumerate(tangents):
            arr = as_array(t)
            if arr.shape != (rho.dim, rho.dim):
                raise InvalidModel("shape", f"tangent {i} has shape {arr.shape}, state dim is {rho.dim}")
            try:
                h = t if isinstance(t, HermitianMatrix) else HermitianMatrix(arr, tol=TANGENT_TOL)
            except InvalidInput as e:
                raise InvalidModel("hermiticity", f"tangent {i}: {e}") from e
            scale = max(1.0, float(np.max(np.abs(h.data))))
            if abs(np.trace(h.data)) > TANGENT_TOL * scale:
                raise InvalidModel("traceless", f"tangent {i} has trace {np.trace(h.data).real:.3e}")
            checked.append(h)
        self.rho = rho
        self.tangents = checked
        self.d = len(checked)
        self.label = label
        gram = self.tangent_gram()
        min_eig = float(np.linalg.eigvalsh(gram)[0])
        if min_eig <= INDEPENDENCE_FLOOR:
            raise InvalidModel(
                "independence", f"tangent Gram matrix has min eigenvalue {min_eig:.3e}"
            )

    def __repr__(self) -> str:
        return f"ModelPoint(label={self.label!r}, dim={self.dim}, d={self.d})"

    @property
    def dim(self) -> int:
        return self.rho.dim

    def tangent_array(self) -> np.ndarray:
        """Tangents stacked as a (d, dim, dim) array."""
        return np.stack([t.data for t in self.tangents])

    @functools.cached_property
    def eigen_tangents(self) -> np.ndarray:
        """Tangents in the eigenbasis of rho, shape (d, dim, dim)."""
        u = self.rho.eigenvectors
        return np.einsum("pi,kpq,qj->kij", u.conj(), self.tangent_array(), u)

    def tangent_gram(self) -> np.ndarray:
        """
        Real Gram matrix Re <d_i rho, d_j rho>^(0)
        """
        t = self.tangent_array()
        r = self.rho.data
        sym = np.einsum("ipq,qr,jrp->ij", t, r, t)
        return 0.5 * (sym + sym.T).real

    def extended(self, extra: Sequence[Union[HermitianMatrix, np.ndarray]], label: str = "") -> "ModelPoint":
        """Same state with extra tangent directions appended."""
        return ModelPoint(self.rho, list(self.tangents) + list(extra), label or self.label)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "d": self.d,
            "rho": utils.complex_to_pairs(self.rho.data),
            "tangents": [utils.complex_to_pairs(t.data) for t in self.tangents],
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelPoint":
        for key in ("dim", "d", "rho", "tangents"):
            if key not in data:
                raise FormatError(f"model is missing key '{key}'")
        try:
            dim = int(data["dim"])
            d = int(data["d"])
            rho = utils.pairs_to_complex(data["rho"])
            tangents = [utils.pairs_to_complex(t) for t in data["tangents"]]
        except (TypeError, ValueError) as e:
            raise FormatError(f"malformed model entries: {e}") from e
        if rho.shape != (dim, dim):
            raise InvalidModel("shape", f"rho has shape {rho.shape}, expected ({dim}, {dim})")
        if len(tangents) != d:
            raise InvalidModel("shape", f"expected {d} tangents, found {len(tangents)}")
        return cls(_as_density(rho), tangents, str(data.get("label", "")))


def _as_density(rho: np.ndarray) -> DensityMatrix:
    """DensityMatrix construction with failures reported as model invariants."""
    try:
        base = HermitianMatrix(rho)
    except InvalidInput as e:
        raise InvalidModel("hermiticity", str(e)) from e
    try:
        return DensityMatrix(base)
    except SingularState as e:
        raise InvalidModel("positivity", str(e)) from e
    except InvalidInput as e:
        raise InvalidModel("trace", str(e)) from e


### Example families ###


def _check_example_params(a: float, r: float) -> None:
    if not 0.0 < a < 1.0:
        raise InvalidInput(f"a must lie in (0, 1), got {a}")
    if not 0.0 <= r < 1.0:
        raise InvalidInput(f"r must lie in [0, 1), got {r}")


def _bloch_terms(a: float, theta: Sequence[float]) -> Tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """
    Contraction c = a (1 - |theta|), Bloch unit vector n and their
    derivatives; at theta = 0 the derivative of |theta| is taken one-sided
    along the first axis.
    """
    t = np.asarray(theta, dtype=float)
    norm = float(np.hypot(t[0], t[1]))
    if norm >= 1.0:
        raise InvalidInput(f"|theta| must be below 1, got {norm}")
    s = np.sqrt(1.0 - norm**2)
    c = a * (1.0 - norm)
    u = t / norm if norm > 0 else np.array([1.0, 0.0])
    dc = -a * u
    n = np.array([t[0], t[1], s])
    dn = np.array([[1.0, 0.0, -t[0] / s], [0.0, 1.0, -t[1] / s]])
    return c, n, dc, dn


def _bloch(v: np.ndarray) -> np.ndarray:
    return sum(vk * p for vk, p in zip(v, PAULI))


def dim2_state(a: float, theta: Sequence[float]) -> np.ndarray:
    c, n, _, _ = _bloch_terms(a, theta)
    return 0.5 * (np.eye(2) + c * _bloch(n))


def dim4_state(a: float, theta: Sequence[float]) -> np.ndarray:
    c, n, _, _ = _bloch_terms(a, theta)
    p = 0.5 * (np.eye(2) + _bloch(n))
    return c * np.kron(p, p) + (1.0 - c) * np.eye(4) / 4


def example_dim2(a: float, r: float) -> ModelPoint:
    """
    Qubit family rho = c P(theta) + (1 - c) I/2 with P the Bloch projector
    and c = a (1 - |theta|), at theta = (r, 0).
    """
    _check_example_params(a, r)
    theta = (r, 0.0)
    c, n, dc, dn = _bloch_terms(a, theta)
    rho = 0.5 * (np.eye(2) + c * _bloch(n))
    tangents = [0.5 * _bloch(dc[k] * n + c * dn[k]) for k in range(2)]
    return ModelPoint(rho, tangents, f"dim2(a={a:g}, r={r:g})")


def example_dim4(a: float, r: float) -> ModelPoint:
    """
    Two-qubit family rho = c P(theta)^{x2} + (1 - c) I/4, at theta = (r, 0).
    """
    _check_example_params(a, r)
    theta = (r, 0.0)
    c, n, dc, dn = _bloch_terms(a, theta)
    p = 0.5 * (np.eye(2) + _bloch(n))
    pp = np.kron(p, p)
    rho = c * pp + (1.0 - c) * np.eye(4) / 4
    tangents = []
    for k in range(2):
        dp = 0.5 * _bloch(dn[k])
        tangents.append(dc[k] * (pp - np.eye(4) / 4) + c * (np.kron(dp, p) + np.kron(p, dp)))
    return ModelPoint(rho, tangents, f"dim4(a={a:g}, r={r:g})")


def example_family(name: str, a: float) -> Callable[[np.ndarray], np.ndarray]:
    """theta -> rho(theta) for the named example family."""
    if name == "dim2":
        return lambda theta: dim2_state(a, theta)
    if name == "dim4":
        return lambda theta: dim4_state(a, theta)
    raise InvalidInput(f"unknown example family '{name}'")


def example_extended_dim2(a: float, r: float) -> ModelPoint:
    """example_dim2 with rho - I/2 appended as a third direction."""
    m = example_dim2(a, r)
    return m.extended([m.rho.data - np.eye(2) / 2], f"dim2+(a={a:g}, r={r:g})")


def example_dim2_beta_bound(a: float, r: float, beta: float) -> float:
    """C^(beta) of example_dim2 with G = J^(S): 2 + B beta - C beta^2."""
    q = 2 - a**2 * (1 - r) ** 3
    lin = 2 * a * np.sqrt((1 - a**2 * (1 - r) ** 2) * q * (1 - r) ** 3) / q
    quad = a**2 * (1 - r) ** 2 * (1 + r) / q
    return float(2 + lin * beta - quad * beta**2)


def example_dim2_beta_star(a: float, r: float) -> float:
    """Maximizing beta of example_dim2 with G = J^(S)."""
    val = np.sqrt((1 - a**2 * (1 - r) ** 2) * (2 - a**2 * (1 - r) ** 3) / (1 - r)) / (a * (1 + r))
    return float(min(1.0, val))


def example_dim4_beta_star(a: float, r: float) -> float:
    """Maximizing beta of example_dim4 with G = J^(S)."""
    s = a * (1 - r)
    inner = (1 - s) * (1 + 3 * s) * (7 - r - s * (-11 + 12 * a * (1 - r) ** 2 + 5 * r)) / (1 - r)
    return float(min(1.0, np.sqrt(inner) / (3 * a * (1 + r))))


def example_dim2_extended_rld_inverse(a: float, r: float) -> np.ndarray:
    """
    Inverse extended RLD Fisher matrix of example_extended_dim2; the (3, 3)
    entry is left as nan.
    """
    s = np.sqrt(1 - r**2)
    pref = 1.0 / (a**2 * (1 - r))
    m = np.array(
        [
            [1 + r, -1j * a * s, (1 + r) / (1 - r)],
            [1j * a * s, 1 / (1 - r), 1j * a * (1 + r) / s],
            [(1 + r) / (1 - r), -1j * a * (1 + r) / s, np.nan],
        ],
        dtype=complex,
    )
    return pref * m


def classical_model(p: float, params: int = 1, q: Optional[float] = None) -> ModelPoint:
    """
    Commuting model: diag(p, 1 - p) with one parameter, or the qutrit
    diag(p, q, 1 - p - q) with two.
    """
    if not 0.0 < p < 1.0:
        raise InvalidInput(f"p must lie in (0, 1), got {p}")
    if params == 1:
        return ModelPoint(np.diag([p, 1.0 - p]), [np.diag([1.0, -1.0])], f"classical(p={p:g})")
    if params == 2:
        q = (1.0 - p) / 2 if q is None else q
        if q <= 0 or p + q >= 1.0:
            raise InvalidInput(f"need q > 0 and p + q < 1, got p={p}, q={q}")
        rho = np.diag([p, q, 1.0 - p - q])
        tangents = [np.diag([1.0, 0.0, -1.0]), np.diag([0.0, 1.0, -1.0])]
        return ModelPoint(rho, tangents, f"classical(p={p:g}, q={q:g})")
    raise InvalidInput(f"classical model has 1 or 2 parameters, got {params}")


def maximally_mixed_qubit() -> ModelPoint:
    """I/2 with tangents sigma_x/2 and sigma_y/2; every derivative commutes with rho."""
    return ModelPoint(np.eye(2) / 2, [SIGMA_X / 2, SIGMA_Y / 2], "mixed qubit")


### Derived models ###


def numeric_tangents(
    rho_fn: Callable[[np.ndarray], Union[np.ndarray, DensityMatrix]],
    theta0: Union[float, Sequence[float]],
    h: Optional[float] = None,
    label: str = "",
) -> ModelPoint:
    """
    Central-difference tangents (rho(theta0 + h e_i) - rho(theta0 - h e_i)) / 2h,
    Hermitized and projected onto the traceless subspace.
    """
    h = DEFAULT_SOLVER.fd_step if h is None else h
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float))
    rho0 = as_array(rho_fn(theta0))
    dim = rho0.shape[0]
    tangents = []
    for i in range(theta0.size):
        e = np.zeros_like(theta0)
        e[i] = h
        diff = (as_array(rho_fn(theta0 + e)) - as_array(rho_fn(theta0 - e))) / (2 * h)
        drift = float(np.max(np.abs(diff - diff.conj().T)))
        if drift > 1e-6:
            log.error("Numeric tangent %d has Hermiticity drift %.3e", i, drift)
            raise NumericalFailure(f"numeric tangent {i} has Hermiticity drift {drift:.3e}")
        diff = utils.hermitian_part(diff)
        diff = diff - np.trace(diff) / dim * np.eye(dim)
        tangents.append(diff)
    return ModelPoint(_as_density(rho0), tangents, label or "numeric")


def tensor_power(m: ModelPoint, n: int) -> ModelPoint:
    """
    n i.i.d. copies: rho^{x n} with Leibniz-rule tangents.
    """
    if n < 1:
        raise InvalidInput(f"tensor power must be positive, got {n}")
    if m.dim**n > MAX_DIM:
        raise InvalidInput(f"dimension {m.dim}^{n} exceeds the supported {MAX_DIM}")
    if n == 1:
        return m
    rho = m.rho.data
    big_rho = functools.reduce(np.kron, [rho] * n)
    tangents = []
    for t in m.tangents:
        total = np.zeros_like(big_rho)
        for k in range(n):
            factors = [rho] * n
            factors[k] = t.data
            total = total + functools.reduce(np.kron, factors)
        tangents.append(total)
    return ModelPoint(big_rho, tangents, f"{m.label}^{n}")


### Random instances ###


def random_density(rng: np.random.Generator, dim: int, mix: float = 0.05) -> np.ndarray:
    """Full-rank state from a Ginibre matrix, mixed with I/dim."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return (1 - mix) * rho + mix * np.eye(dim) / dim


def random_traceless(rng: np.random.Generator, dim: int) -> np.ndarray:
    x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    x = utils.hermitian_part(x)
    return x - np.trace(x) / dim * np.eye(dim)


def random_model(rng: np.random.Generator, dim: int, d: int, label: str = "") -> ModelPoint:
    if d > dim * dim - 1:
        raise InvalidInput(f"at most {dim * dim - 1} independent directions in dimension {dim}")
    rho = random_density(rng, dim)
    tangents = [random_traceless(rng, dim) for _ in range(d)]
    return ModelPoint(rho, tangents, label or f"random(dim={dim}, d={d})")


def random_weight(rng: np.random.Generator, d: int) -> WeightMatrix:
    x = rng.standard_normal((d, d))
    return WeightMatrix(x @ x.T + 0.1 * np.eye(d))


def random_povm(rng: np.random.Generator, dim: int, outcomes: int) -> List[np.ndarray]:
    """
    Random POVM: PSD elements A_x normalized as S^-1/2 A_x S^-1/2, S = sum A_x.
    """
    elems = []
    for _ in range(outcomes):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        elems.append(g @ g.conj().T)
    w, u = np.linalg.eigh(sum(elems))
    s_inv = (u / np.sqrt(w)) @ u.conj().T
    return [utils.hermitian_part(s_inv @ e @ s_inv) for e in elems]


### Model files ###


def load_model(path: str) -> ModelPoint:
    """
    Read a model file; parse problems raise FormatError, invariant
    violations raise InvalidModel.
    """
    log.debug("Loading model from %s", path)
    if not os.path.exists(path):
        raise FormatError(f"model file not found: {path}")
    try:
        data = utils.read_json(path)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as e:
        log.error("Cannot read model file %s: %s", path, e)
        raise FormatError(f"cannot parse {path}: {e}") from e
    if not isinstance(data, dict):
        raise FormatError(f"{path}: top level must be an object")
    m = ModelPoint.from_dict(data)
    if not m.label:
        m.label = os.path.basename(path)
    log.info("Loaded model %s (dim=%d, d=%d)", m.label, m.dim, m.d)
    return m


def save_model(m: ModelPoint, path: str) -> None:
    dirpath = os.path.dirname(path)
    if dirpath and not os.path.exists(dirpath):
        os.makedirs(dirpath, exist_ok=True)
    utils.write_json(path, m.to_dict())
    log.debug("Wrote model %s to %s", m.label, path)
