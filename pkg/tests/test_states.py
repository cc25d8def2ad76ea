import math

import numpy as np
import pytest

from qillum.errors import NumericalHealthError, ParameterError, SolverError
from qillum.states import (
    BipartiteState,
    StatePrepParams,
    control_plus,
    mean_photon_A,
    probe_state,
    pstmss_coefficients,
    pstmss_state,
    solve_lambda_for_Nt,
    thermal_state,
    thermal_weights,
    vacuum,
)


def untruncated_mean_photon(lam):
    # sum_n n (n+1)^2 x^n over sum_n (n+1)^2 x^n with x = lambda^2
    x = lam**2
    return 2 * x * (2 + x) / ((1 - x) * (1 + x))


def test_unnormalised_coefficients_sum_to_one_in_the_limit():
    c = pstmss_coefficients(StatePrepParams(0.4, 80, renormalize=False))
    assert np.sum(c**2) == pytest.approx(1.0, abs=1e-13)


@pytest.mark.parametrize("lam", [0.05, 0.3, 0.6])
def test_mean_photon_matches_series_sum(lam):
    state = pstmss_state(StatePrepParams(lam, 80))
    assert mean_photon_A(state) == pytest.approx(untruncated_mean_photon(lam), rel=1e-10)


def test_coefficients_follow_closed_form():
    lam = 0.2
    c = pstmss_coefficients(StatePrepParams(lam, 5, renormalize=False))
    n = np.arange(5)
    expected = (1 - lam**2) ** 1.5 * (n + 1) * lam**n / math.sqrt(1 + lam**2)
    np.testing.assert_allclose(c, expected, rtol=1e-14)


def test_pstmss_state_is_pure_and_valid():
    st = pstmss_state(StatePrepParams(0.5, 6))
    st.validate()
    m = st.matrix
    np.testing.assert_allclose(m @ m, m, atol=1e-13)
    # photon-number correlated: reduced states are equal and diagonal
    np.testing.assert_allclose(st.reduced_a(), st.reduced_b(), atol=1e-15)
    ra = st.reduced_a()
    np.testing.assert_allclose(ra, np.diag(np.diag(ra)), atol=1e-15)


def test_lambda_zero_gives_vacuum_pair():
    st = pstmss_state(StatePrepParams(0.0, 3))
    expected = np.zeros((9, 9))
    expected[0, 0] = 1.0
    np.testing.assert_allclose(st.matrix, expected, atol=1e-15)


def test_state_prep_rejects_lambda_at_or_above_one():
    with pytest.raises(ParameterError):
        StatePrepParams(1.0, 4)
    with pytest.raises(ParameterError):
        StatePrepParams(-0.1, 4)


@pytest.mark.parametrize("nt,dim", [(0.01, 10), (0.1, 6), (0.5, 14)])
def test_solver_hits_target_mean_photon_number(nt, dim):
    lam = solve_lambda_for_Nt(nt, dim)
    assert mean_photon_A(pstmss_state(StatePrepParams(lam, dim))) == pytest.approx(nt, abs=1e-10)


def test_solver_default_probe_value():
    # N_t = 0.01 sits deep in the small-lambda regime where truncation is invisible
    lam = solve_lambda_for_Nt(0.01, 10)
    assert lam == pytest.approx(0.04997, abs=1e-5)
    assert untruncated_mean_photon(lam) == pytest.approx(0.01, rel=1e-9)


def test_solver_zero_target_and_unreachable_target():
    assert solve_lambda_for_Nt(0.0, 10) == 0.0
    with pytest.raises(SolverError):
        solve_lambda_for_Nt(50.0, 4)
    with pytest.raises(ParameterError):
        solve_lambda_for_Nt(-0.1, 4)


def test_probe_state_has_requested_mean():
    st = probe_state(0.01, 8)
    st.validate()
    assert mean_photon_A(st) == pytest.approx(0.01, abs=1e-10)


def test_thermal_weights_geometric():
    w = thermal_weights(0.5, 6)
    np.testing.assert_allclose(w[1:] / w[:-1], 1 / 3, rtol=1e-14)
    assert w.sum() == pytest.approx(1 - (1 / 3) ** 6, rel=1e-14)


def test_thermal_state_renormalisation_and_mean():
    raw = thermal_state(0.5, 6, renormalize=False)
    assert np.trace(raw).real < 1.0
    th = thermal_state(0.5, 60)
    assert np.trace(th).real == pytest.approx(1.0, abs=1e-15)
    assert np.dot(np.arange(60), np.diag(th).real) == pytest.approx(0.5, rel=1e-12)


def test_thermal_zero_temperature_is_vacuum():
    np.testing.assert_array_equal(thermal_state(0.0, 4), vacuum(4))


def test_control_plus_is_pure():
    c = control_plus()
    np.testing.assert_allclose(c @ c, c)
    assert np.trace(c) == pytest.approx(1.0)


def test_validate_rejects_bad_states():
    with pytest.raises(NumericalHealthError):
        BipartiteState(1, 2, np.diag([0.7, 0.7]).astype(complex)).validate()
    with pytest.raises(NumericalHealthError):
        BipartiteState(1, 2, np.diag([1.2, -0.2]).astype(complex)).validate()
    with pytest.raises(ParameterError):
        BipartiteState(2, 2, np.eye(3))
