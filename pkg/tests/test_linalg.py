import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qillum.errors import DimensionError, NumericalHealthError, ParameterError
from qillum.linalg import (
    clamp_threshold,
    herm_eig,
    is_hermitian,
    kron,
    mat_pow_s,
    partial_trace,
    powered_eigenvalues,
    spectral_norm,
    trace_norm_half,
)


def random_matrix(rng, n, m=None):
    m = n if m is None else m
    return rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))


def random_hermitian(rng, n):
    a = random_matrix(rng, n)
    return a + a.conj().T


def loop_partial_trace_b(m, da, db):
    """Trace over the second factor with explicit index loops."""
    out = np.zeros((da, da), dtype=complex)
    for i in range(da):
        for j in range(da):
            for b in range(db):
                out[i, j] += m[i * db + b, j * db + b]
    return out


def loop_partial_trace_a(m, da, db):
    out = np.zeros((db, db), dtype=complex)
    for b in range(db):
        for c in range(db):
            for a in range(da):
                out[b, c] += m[a * db + b, a * db + c]
    return out


@pytest.mark.parametrize("da,db", [(2, 3), (3, 2), (4, 4), (1, 5)])
def test_partial_trace_matches_index_loops(da, db):
    rng = np.random.default_rng(da * 10 + db)
    m = random_matrix(rng, da * db)
    np.testing.assert_allclose(partial_trace(m, [da, db], keep=[0]), loop_partial_trace_b(m, da, db), atol=1e-13)
    np.testing.assert_allclose(partial_trace(m, [da, db], keep=[1]), loop_partial_trace_a(m, da, db), atol=1e-13)


def test_partial_trace_of_product_state():
    rng = np.random.default_rng(1)
    a = random_matrix(rng, 3)
    b = random_matrix(rng, 4)
    b /= np.trace(b)
    np.testing.assert_allclose(partial_trace(kron(a, b), [3, 4], keep=[0]), a, atol=1e-12)


def test_partial_trace_three_factors_keeps_middle():
    rng = np.random.default_rng(2)
    x, y, z = random_matrix(rng, 2), random_matrix(rng, 3), random_matrix(rng, 2)
    m = kron(kron(x, y), z)
    expected = np.trace(x) * np.trace(z) * y
    np.testing.assert_allclose(partial_trace(m, [2, 3, 2], keep=[1]), expected, atol=1e-12)


def test_partial_trace_keep_all_is_identity_map():
    m = np.arange(36, dtype=complex).reshape(6, 6)
    np.testing.assert_array_equal(partial_trace(m, [2, 3], keep=[0, 1]), m)


def test_partial_trace_rejects_bad_dims():
    with pytest.raises(DimensionError):
        partial_trace(np.eye(6), [2, 2], keep=[0])
    with pytest.raises(DimensionError):
        partial_trace(np.eye(4), [2, 2], keep=[2])


def test_kron_layout_slowest_left():
    a = np.array([[0, 1], [0, 0]])
    b = np.eye(3)
    k = kron(a, b)
    # |0>|j> <- |1>|j> sits at row j, column 3 + j
    for j in range(3):
        assert k[j, 3 + j] == 1


@pytest.mark.parametrize("n", [1, 2, 7, 30])
def test_herm_eig_reconstructs_and_solves_characteristic_equation(n):
    rng = np.random.default_rng(n)
    h = random_hermitian(rng, n)
    w, v = herm_eig(h)
    assert np.all(np.diff(w) >= 0)
    np.testing.assert_allclose(v @ np.diag(w) @ v.conj().T, h, atol=1e-10)
    np.testing.assert_allclose(v.conj().T @ v, np.eye(n), atol=1e-12)
    # each eigenvalue makes H - lambda I singular
    for lam in w:
        smallest = np.linalg.svd(h - lam * np.eye(n), compute_uv=False)[-1]
        assert smallest < 1e-9 * max(1.0, np.abs(w).max())


def test_herm_eig_rejects_non_hermitian():
    m = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(NumericalHealthError):
        herm_eig(m)


def test_is_hermitian_tolerance():
    m = np.eye(3, dtype=complex)
    m[0, 1] = 1e-12
    assert is_hermitian(m, 1e-10)
    assert not is_hermitian(m, 1e-14)


def test_powered_eigenvalues_support_convention():
    w = np.array([0.0, 1e-15, 0.25, 1.0])
    out = powered_eigenvalues(w, 0.0)
    np.testing.assert_array_equal(out, [0.0, 0.0, 1.0, 1.0])
    np.testing.assert_allclose(powered_eigenvalues(w, 0.5), [0.0, 0.0, 0.5, 1.0])


def test_powered_eigenvalues_rejects_real_negativity():
    with pytest.raises(NumericalHealthError):
        powered_eigenvalues(np.array([-1e-6, 0.5]), 0.5)
    # tiny negatives inside the clamp are tolerated and zeroed
    assert powered_eigenvalues(np.array([-1e-14, 0.5]), 0.5)[0] == 0.0


def test_clamp_threshold_scales_above_unit_norm():
    assert clamp_threshold(np.array([0.1, 0.5]), 1e-12) == 1e-12
    assert clamp_threshold(np.array([0.1, 50.0]), 1e-12) == pytest.approx(5e-11)


def test_mat_pow_s_square_root():
    rng = np.random.default_rng(3)
    a = random_matrix(rng, 5)
    rho = a @ a.conj().T
    root = mat_pow_s(rho, 0.5)
    np.testing.assert_allclose(root @ root, rho, atol=1e-10)
    np.testing.assert_allclose(mat_pow_s(rho, 1.0), rho, atol=1e-10)


def test_mat_pow_s_zero_is_support_projector():
    rho = np.diag([0.5, 0.5, 0.0]).astype(complex)
    np.testing.assert_allclose(mat_pow_s(rho, 0.0), np.diag([1.0, 1.0, 0.0]), atol=1e-14)


def test_mat_pow_s_rejects_exponent_outside_unit_interval():
    with pytest.raises(ParameterError):
        mat_pow_s(np.eye(2), 1.5)


def test_trace_norm_half_hermitian_and_general_paths_agree():
    rng = np.random.default_rng(4)
    h = random_hermitian(rng, 6)
    expected = 0.5 * np.abs(np.linalg.eigvalsh(h)).sum()
    assert trace_norm_half(h) == pytest.approx(expected, rel=1e-12)
    g = random_matrix(rng, 6)
    assert trace_norm_half(g) == pytest.approx(0.5 * np.linalg.svd(g, compute_uv=False).sum(), rel=1e-12)


def test_spectral_norm_of_diagonal():
    assert spectral_norm(np.diag([0.1, -3.0, 2.0])) == pytest.approx(3.0)
    assert spectral_norm(np.zeros((0, 0))) == 0.0


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=4), st.integers(min_value=1, max_value=4), st.integers(0, 2**31 - 1))
def test_partial_trace_preserves_total_trace(da, db, seed):
    m = random_matrix(np.random.default_rng(seed), da * db)
    total = np.trace(m)
    assert np.trace(partial_trace(m, [da, db], keep=[0])) == pytest.approx(total, abs=1e-10)
    assert np.trace(partial_trace(m, [da, db], keep=[1])) == pytest.approx(total, abs=1e-10)
