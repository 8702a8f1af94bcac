"""Exact and asymptotic cross-covariances against independent quadrature."""

import numpy as np
import pytest

from mfou import ModelParams, UnsupportedParameterError, ccf_asymptotic, ccf_exact, ccf_exact_lags, ccf_zero, stationary_covariance

from oracles import ccf_nested_quad

DELTA = 1.0 / 252


def _pair(alpha, hurst, rho=0.94, eta=0.2, nu=(0.78, 0.79)):
    return ModelParams.bivariate(alpha=alpha, nu=nu, hurst=hurst, rho=rho, eta=eta)


# --- lag-0 closed form -----------------------------------------------------


def test_classical_ou_variance():
    p = ModelParams.univariate(alpha=1.7, nu=0.9, hurst=0.5)
    assert ccf_zero(0, 0, p) == pytest.approx(0.9**2 / (2 * 1.7), rel=1e-14)


def test_baseline_variance_level(panel_a_params):
    assert ccf_zero(0, 0, panel_a_params) == pytest.approx(0.24, abs=0.005)


def test_uncorrelated_drivers_zero():
    p = _pair((1.0, 2.0), (0.2, 0.3), rho=0.0, eta=0.0)
    assert ccf_zero(0, 1, p) == 0.0


def test_zero_lag_symmetric(asym_params):
    assert ccf_zero(0, 1, asym_params) == pytest.approx(ccf_zero(1, 0, asym_params), rel=1e-14)


def test_stationary_covariance_psd(asym_params):
    cov = stationary_covariance(asym_params)
    assert np.array_equal(cov, cov.T)
    w = np.linalg.eigvalsh(cov)
    assert w[0] >= -1e-8 * np.trace(cov)


# --- exact covariance -------------------------------------------------------


def test_lag_zero_reduction(asym_params):
    assert ccf_exact(0, 1, 0.0, asym_params) == ccf_zero(0, 1, asym_params)


def test_symmetric_configuration_exact_equality():
    p = _pair((1.4, 1.4), (0.19, 0.21), rho=0.8, eta=0.0)
    for k in (DELTA, 10 * DELTA, 0.4):
        assert ccf_exact(0, 1, k, p) == pytest.approx(ccf_exact(1, 0, k, p), abs=1e-12)


def test_negative_lag_transpose_identity(asym_params):
    for k in (DELTA, 7 * DELTA):
        assert ccf_exact(0, 1, -k, asym_params) == ccf_exact(1, 0, k, asym_params)


@pytest.mark.parametrize("hurst", [(0.19, 0.21), (0.6, 0.7)])
@pytest.mark.parametrize("alpha", [(1.32, 1.45), (0.05, 0.05), (5.0, 3.0)])
def test_oracle_agreement(alpha, hurst):
    p = _pair(alpha, hurst)
    for k in (DELTA, 20 * DELTA, 0.5):
        got = ccf_exact(0, 1, k, p)
        ref = ccf_nested_quad(0, 1, k, p)
        assert got == pytest.approx(ref, rel=2e-8, abs=1e-12)


def test_autocovariance_oracle_agreement(panel_a_params):
    for k in (DELTA, 50 * DELTA):
        got = ccf_exact(0, 0, k, panel_a_params)
        ref = ccf_nested_quad(0, 0, k, panel_a_params)
        assert got == pytest.approx(ref, rel=1e-8)


def test_route_boundary_continuity():
    # exponent-based routing switches evaluation scheme; values must agree across it
    p = _pair((30.0, 24.0), (0.19, 0.21))
    k_split = 8.0 / 24.0  # inner (trailing) rate 24 governs the switch
    lo = ccf_exact(0, 1, k_split * (1 - 1e-9), p)
    hi = ccf_exact(0, 1, k_split * (1 + 1e-9), p)
    assert lo == pytest.approx(hi, rel=1e-7)
    near = ccf_exact_lags(0, 1, np.array([0.2, k_split, 3.9, 4.0]), p)
    assert np.all(np.isfinite(near))


@pytest.mark.parametrize("hurst", [(0.19, 0.21), (0.6, 0.7)])
def test_damped_route_oracle_agreement(hurst):
    # lags that force the damped-form quadrature (a_i k well beyond the split)
    p = _pair((30.0, 24.0), hurst)
    for k in (0.5, 2.0):
        got = ccf_exact(0, 1, k, p)
        ref = ccf_nested_quad(0, 1, k, p)
        assert got == pytest.approx(ref, rel=5e-7, abs=1e-13)


def test_decay_to_zero(asym_params):
    k = 50.0 / float(asym_params.alpha.min())
    val = ccf_exact(0, 1, k, asym_params)
    assert abs(val) < 1e-3 * abs(ccf_zero(0, 1, asym_params))


def test_power_law_tail_exponent():
    # log|ccf| / log k -> H_i + H_j - 2 for large k
    p = _pair((1.32, 1.45), (0.19, 0.21))
    hij = 0.4
    a = float(p.alpha.max())
    k1, k2 = 100.0 / a, 1000.0 / a
    g1 = ccf_exact(0, 1, k1, p)
    g2 = ccf_exact(0, 1, k2, p)
    slope = (np.log(abs(g2)) - np.log(abs(g1))) / (np.log(k2) - np.log(k1))
    assert slope == pytest.approx(hij - 2.0, abs=0.1)


def test_hurst_sum_one_rejected():
    p = _pair((1.0, 1.0), (0.45, 0.55))
    with pytest.raises(UnsupportedParameterError):
        ccf_exact(0, 1, DELTA, p)


def test_batch_matches_scalar(asym_params):
    ks = np.array([0.0, DELTA, 5 * DELTA, 50 * DELTA])
    batch = ccf_exact_lags(0, 1, ks, asym_params)
    singles = [ccf_exact(0, 1, float(k), asym_params) for k in ks]
    np.testing.assert_allclose(batch, singles, rtol=1e-13)


# --- slow-mean-reversion approximation --------------------------------------


def test_asymptotic_at_zero(asym_params):
    c0 = ccf_zero(0, 1, asym_params)
    assert ccf_asymptotic(0, 1, 0.0, c0, asym_params) == c0


def test_asymptotic_self_pair_halving():
    p = ModelParams.univariate(alpha=0.5, nu=1.0, hurst=0.2)
    c0 = 3.0
    assert ccf_asymptotic(0, 0, 1.0, c0, p) == pytest.approx(c0 - 0.5)


def test_asymptotic_error_shrinks_with_alpha(panel_a_params):
    k = DELTA
    errs = []
    for a in (0.5, 0.05, 0.005):
        p = ModelParams.bivariate(alpha=(a, a), nu=(0.78, 0.79), hurst=(0.19, 0.21), rho=0.94)
        c0 = ccf_zero(0, 1, p)
        errs.append(abs(ccf_exact(0, 1, k, p) - float(ccf_asymptotic(0, 1, k, c0, p))))
    assert errs[0] > errs[1] > errs[2]


def test_asymptotic_rejects_negative_lag(asym_params):
    with pytest.raises(ValueError):
        ccf_asymptotic(0, 1, -1.0, 0.2, asym_params)
