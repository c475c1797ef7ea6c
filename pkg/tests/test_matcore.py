import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qcrb.errors import InvalidInput, InvalidWeight, SingularBlock, SingularState
from qcrb.matcore import (
    DensityMatrix,
    HermitianMatrix,
    Superoperator,
    WeightMatrix,
    apply_commutation,
    beta_shift_superop,
    commutation_superop,
    eig_hermitian,
    inner_beta,
    left_mult_superop,
    min_real_cov,
    right_mult_superop,
    schur_complement,
    symmetrization_superop,
    unvec,
    vec,
    weighted_abs_trace,
)
from qcrb.model import SIGMA_X, SIGMA_Y, SIGMA_Z, random_density, random_traceless


def test_import_matcore():
    import importlib
    importlib.import_module("qcrb.matcore")


### Tests for matrix types

def test_hermitian_symmetrizes_small_drift():
    x = np.array([[1.0, 2.0 + 1e-14], [2.0, 3.0]])
    h = HermitianMatrix(x)
    assert np.allclose(h.data, h.data.conj().T, atol=0)
    assert h.trace() == pytest.approx(4.0)


def test_hermitian_rejects_large_drift():
    with pytest.raises(InvalidInput):
        HermitianMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_hermitian_rejects_non_square():
    with pytest.raises(InvalidInput):
        HermitianMatrix(np.zeros((2, 3)))


def test_hermitian_rejects_non_finite():
    with pytest.raises(InvalidInput):
        HermitianMatrix(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(InvalidInput):
        HermitianMatrix(np.array([[1.0, np.inf], [np.inf, 1.0]]))


def test_density_trace_and_floor():
    with pytest.raises(InvalidInput):
        DensityMatrix(np.diag([0.6, 0.5]))
    with pytest.raises(SingularState):
        DensityMatrix(np.diag([1.0, 0.0]))
    rho = DensityMatrix(np.diag([0.25, 0.75]))
    assert rho.eigenvalues.tolist() == pytest.approx([0.25, 0.75])


def test_weight_matrix_validation():
    with pytest.raises(InvalidWeight):
        WeightMatrix([[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(InvalidWeight):
        WeightMatrix([[1.0, 1.0], [0.0, 1.0]])
    g = WeightMatrix([[4.0, 0.0], [0.0, 1.0]])
    assert np.allclose(g.sqrt, np.diag([2.0, 1.0]))
    assert np.allclose(g.inv_sqrt @ g.sqrt, np.eye(2))
    assert WeightMatrix(2.0).d == 1


@pytest.mark.parametrize("bad", [np.nan, np.inf])
def test_weight_matrix_rejects_non_finite(bad):
    with pytest.raises(InvalidWeight):
        WeightMatrix([[1.0, 0.0], [0.0, bad]])


def test_superoperator_shape_check():
    with pytest.raises(InvalidInput):
        Superoperator(np.eye(3))


### Tests for eig_hermitian

def test_eig_hermitian_diagonal_and_pauli():
    w, u = eig_hermitian(np.diag([0.75, 0.25]))
    assert w.tolist() == pytest.approx([0.25, 0.75])
    assert np.allclose(np.abs(u), [[0, 1], [1, 0]])
    w, _ = eig_hermitian(SIGMA_X)
    assert w.tolist() == pytest.approx([-1.0, 1.0])


def test_eig_hermitian_reconstruction(rng):
    x = random_traceless(rng, 4)
    w, u = eig_hermitian(x)
    assert np.all(np.diff(w) >= 0)
    assert np.max(np.abs(u @ np.diag(w) @ u.conj().T - x)) < 1e-10 * np.linalg.norm(x)


### Tests for weighted traces and min_real_cov

def test_weighted_abs_trace_examples():
    m = np.array([[0, -1j], [1j, 0]])
    assert weighted_abs_trace(np.eye(2), m) == pytest.approx(2.0)
    assert weighted_abs_trace(np.eye(2), np.zeros((2, 2))) == pytest.approx(0.0)
    assert weighted_abs_trace(np.diag([4.0, 1.0]), m) == pytest.approx(4.0)


def test_min_real_cov_examples():
    value, v = min_real_cov(np.eye(2), np.array([[1, 1j], [-1j, 1]]))
    assert value == pytest.approx(4.0)
    assert np.allclose(v, 2 * np.eye(2))
    value, v = min_real_cov(np.eye(2), np.diag([2.0, 3.0]))
    assert value == pytest.approx(5.0)
    assert np.allclose(v, np.diag([2.0, 3.0]))


def test_min_real_cov_rejects_non_psd():
    with pytest.raises(InvalidInput):
        min_real_cov(np.eye(2), np.diag([1.0, -1.0]))


def test_min_real_cov_dominates_and_is_minimal(rng):
    g = WeightMatrix(np.diag([1.0, 2.0]))
    h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    j = h @ h.conj().T
    value, v_star = min_real_cov(g, j)
    assert np.linalg.eigvalsh(v_star - j)[0] >= -1e-10
    assert float(np.trace(g.entries @ v_star)) == pytest.approx(value, rel=1e-12)
    for _ in range(200):
        noise = rng.standard_normal((2, 2))
        w = v_star + noise @ noise.T
        assert float(np.trace(g.entries @ w)) >= value - 1e-9


### Tests for schur_complement

def test_schur_complement_examples():
    assert np.allclose(schur_complement(np.eye(4), 2), np.eye(2))
    assert schur_complement(np.array([[2.0, 1.0], [1.0, 1.0]]), 1)[0, 0] == pytest.approx(1.0)


def test_schur_complement_singular_block():
    a = np.eye(3)
    a[2, 2] = 0.0
    with pytest.raises(SingularBlock):
        schur_complement(a, 2)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (2, 5, 5), elements=st.floats(-1, 1)))
def test_schur_block_inverse_identity(parts):
    a = parts[0] + 1j * parts[1]
    a = a + a.conj().T + 30 * np.eye(5)
    lhs = np.linalg.inv(schur_complement(a, 2))
    rhs = np.linalg.inv(a)[:2, :2]
    assert np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)) < 1e-9


### Tests for superoperators

def test_vec_convention():
    a = np.arange(4.0).reshape(2, 2)
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.array([[0.0, 1.0], [1.0, 1.0]])
    assert np.allclose(np.kron(b.T, a) @ vec(x), vec(a @ x @ b))
    assert np.allclose(unvec(vec(x), 2), x)


def test_commutation_examples():
    rho = DensityMatrix(np.diag([0.75, 0.25]))
    assert np.allclose(commutation_superop(rho).apply(SIGMA_X), 0.5 * SIGMA_Y)
    assert np.allclose(apply_commutation(rho, rho.data), 0)
    mixed = DensityMatrix(np.eye(3) / 3)
    assert np.allclose(commutation_superop(mixed).matrix, 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=2, max_value=4))
def test_commutation_identity_and_hermiticity(seed, dim):
    rng = np.random.default_rng(seed)
    rho = DensityMatrix(random_density(rng, dim))
    x = random_traceless(rng, dim)
    dx = commutation_superop(rho).apply(x)
    r = rho.data
    assert np.max(np.abs(dx @ r + r @ dx - 1j * (x @ r - r @ x))) < 1e-10
    assert np.max(np.abs(dx - dx.conj().T)) < 1e-12


def test_commutation_norm_below_one(rng):
    rho = DensityMatrix(random_density(rng, 3))
    lam = rho.eigenvalues
    bound = max(abs(a - b) / (a + b) for a in lam for b in lam)
    assert commutation_superop(rho).norm() <= bound + 1e-12
    assert bound < 1


def test_superoperator_linearity(rng):
    rho = DensityMatrix(random_density(rng, 3))
    s = commutation_superop(rho)
    x, y = random_traceless(rng, 3), random_traceless(rng, 3)
    assert np.max(np.abs(s.apply(2 * x - 3j * y) - 2 * s.apply(x) + 3j * s.apply(y))) < 1e-10


def test_symmetrization_matches_left_right(rng):
    rho = DensityMatrix(random_density(rng, 3))
    sym = symmetrization_superop(rho).matrix
    direct = 0.5 * (left_mult_superop(rho).matrix + right_mult_superop(rho).matrix)
    assert np.max(np.abs(sym - direct)) < 1e-12
    x = random_traceless(rng, 3)
    assert np.allclose(left_mult_superop(rho).apply(x), rho.data @ x)
    assert np.allclose(right_mult_superop(rho).apply(x), x @ rho.data)


def test_beta_shift_solves_symmetrized_equation(rng):
    rho = DensityMatrix(random_density(rng, 2))
    x = random_traceless(rng, 2)
    shifted = beta_shift_superop(rho, 0.4).apply(x)
    expected = x + 0.4j * commutation_superop(rho).apply(x)
    assert np.allclose(shifted, expected, atol=1e-12)


### Tests for inner_beta

def test_inner_beta_examples():
    rho = DensityMatrix(np.eye(2) / 2)
    assert inner_beta(SIGMA_Z, SIGMA_Z, rho, 0.0) == pytest.approx(1.0)
    with pytest.raises(InvalidInput):
        inner_beta(SIGMA_Z, SIGMA_Z, rho, 1.5)
    with pytest.raises(InvalidInput):
        inner_beta(np.eye(3), np.eye(3), rho, 0.0)


def test_inner_beta_rld_positive(rng):
    rho = DensityMatrix(random_density(rng, 3))
    x = random_traceless(rng, 3)
    val = inner_beta(x, x, rho, 1.0)
    assert val.real >= 0
    assert val == pytest.approx(np.trace(x.conj().T @ rho.data @ x))


def test_inner_beta_through_commutation(rng):
    rho = DensityMatrix(np.diag([0.6, 0.4]))
    d = commutation_superop(rho)
    for _ in range(5):
        x, y = random_traceless(rng, 2), random_traceless(rng, 2)
        for beta in (0.25, 0.5, 1.0):
            lhs = inner_beta(x, y, rho, beta)
            rhs = inner_beta(x, y + 1j * beta * d.apply(y), rho, 0.0)
            assert abs(lhs - rhs) < 1e-12
