"""Parameter containers, admissibility, and the noise covariance kernel."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfou import ModelParams, UnsupportedParameterError, coherency, mfgn_cov, validate_params
from mfou.errors import DimensionError

from oracles import increment_block_covariance


def test_univariate_valid():
    p = ModelParams.univariate(alpha=1.0, nu=1.0, hurst=0.2)
    report = validate_params(p)
    assert report.ok and report.violations == []


def test_rho_out_of_range_flagged():
    p = ModelParams.bivariate(alpha=(1, 1), nu=(1, 1), hurst=(0.2, 0.3), rho=1.2)
    report = validate_params(p)
    assert not report.ok
    assert any(v.constraint == "rho range" for v in report.violations)


def test_marginally_inadmissible_pair_flagged():
    # very high correlation with unequal roughness: coherency just above 1
    p = ModelParams.bivariate(alpha=(1.32, 1.36), nu=(0.78, 0.83), hurst=(0.194, 0.157), rho=0.996, eta=0.019)
    c = coherency(0.194, 0.157, 0.996, 0.019)
    assert 1.0 < c < 1.01
    report = validate_params(p)
    viol = [v for v in report.violations if v.constraint == "coherency"]
    assert len(viol) == 1 and viol[0].where == (0, 1)
    assert viol[0].value == pytest.approx(c)


def test_structural_checks():
    with pytest.raises(DimensionError):
        ModelParams(
            alpha=np.array([1.0, 2.0]),
            nu=np.array([1.0]),
            mu=np.zeros(2),
            hurst=np.array([0.2, 0.3]),
            rho=np.eye(2),
            eta=np.zeros((2, 2)),
        )
    bad_eta = ModelParams(
        alpha=np.array([1.0, 2.0]),
        nu=np.array([1.0, 1.0]),
        mu=np.zeros(2),
        hurst=np.array([0.2, 0.3]),
        rho=np.eye(2),
        eta=np.array([[0.0, 0.1], [0.1, 0.0]]),
    )
    assert any(v.constraint == "eta antisymmetric" for v in validate_params(bad_eta).violations)


def test_validation_idempotent_and_pure(panel_a_params):
    before = panel_a_params.rho.copy()
    r1 = validate_params(panel_a_params)
    r2 = validate_params(panel_a_params)
    assert r1.ok == r2.ok and len(r1.violations) == len(r2.violations)
    assert np.array_equal(panel_a_params.rho, before)


# --- coherency ----------------------------------------------------------------


def test_coherency_zero_dependence():
    assert coherency(0.3, 0.6, 0.0, 0.0) == 0.0


def test_coherency_boundary_equal_laws():
    for h in (0.1, 0.25, 0.5, 0.77):
        assert coherency(h, h, 1.0, 0.0) == pytest.approx(1.0, abs=1e-12)


def test_coherency_psd_oracle_grid():
    """The unit contour of the coherency functional is PSD-ness of the kernel.

    On a >= 200-point grid, c <= 1 must coincide with the smallest eigenvalue
    of the 256-lag increment covariance clearing -1e-8 * largest.
    """
    rng = np.random.default_rng(7)
    tested = agreed = 0
    while tested < 220:
        h1, h2 = rng.uniform(0.05, 0.95, 2)
        if abs(h1 + h2 - 1.0) < 0.02:
            continue
        rho = float(rng.uniform(-0.99, 0.99))
        eta = float(rng.uniform(-0.8, 0.8))
        c = coherency(h1, h2, rho, eta)
        if abs(c - 1.0) < 5e-3:  # exactly-critical pairs are decided by strictly more lags
            continue
        p = ModelParams.bivariate(alpha=(1, 1), nu=(1, 1), hurst=(h1, h2), rho=rho, eta=eta)
        w = np.linalg.eigvalsh(increment_block_covariance(p, m=256))
        psd = w[0] >= -1e-8 * max(abs(w[-1]), 1e-300)
        tested += 1
        agreed += (c <= 1.0) == psd
    assert agreed == tested, f"coherency/PSD disagreement on {tested - agreed} of {tested} points"


# --- noise kernel ---------------------------------------------------------------


def test_unit_variance_self(panel_a_params):
    assert mfgn_cov(0, 0, 0, 1.0, panel_a_params) == pytest.approx(1.0)


def test_independent_components_zero():
    p = ModelParams.bivariate(alpha=(1, 1), nu=(1, 1), hurst=(0.2, 0.3), rho=0.0, eta=0.0)
    for h in (-3, -1, 0, 1, 2, 7):
        assert mfgn_cov(0, 1, h, 0.5, p) == 0.0


def test_asymmetry_present_with_eta(asym_params):
    vals_ij = mfgn_cov(0, 1, np.arange(1, 5), 1.0, asym_params)
    vals_ji = mfgn_cov(1, 0, np.arange(1, 5), 1.0, asym_params)
    assert np.all(np.abs(vals_ij - vals_ji) > 1e-6)


def test_lag_reversal_transpose_identity(asym_params):
    lags = np.arange(-6, 7)
    for i in range(2):
        for j in range(2):
            lhs = mfgn_cov(i, j, lags, 0.3, asym_params)
            rhs = mfgn_cov(j, i, -lags, 0.3, asym_params)
            np.testing.assert_allclose(lhs, rhs, rtol=1e-13)


def test_classical_fgn_autocovariance(panel_a_params):
    h = np.arange(-5, 6)
    hurst = 0.19
    delta = 1.0 / 252
    expected = 0.5 * (
        np.abs(h - 1) ** (2 * hurst) - 2 * np.abs(h) ** (2 * hurst) + np.abs(h + 1) ** (2 * hurst)
    ) * delta ** (2 * hurst)
    np.testing.assert_allclose(mfgn_cov(0, 0, h, delta, panel_a_params), expected, rtol=1e-14)


def test_white_noise_reduction():
    p = ModelParams.univariate(alpha=1.0, nu=1.0, hurst=0.5)
    delta = 0.25
    assert mfgn_cov(0, 0, 0, delta, p) == pytest.approx(delta, rel=1e-15)
    for h in (1, -1, 2, 5):
        assert mfgn_cov(0, 0, h, delta, p) == pytest.approx(0.0, abs=1e-15)


def test_hurst_sum_one_rejected_for_cross_pairs():
    p = ModelParams.bivariate(alpha=(1, 1), nu=(1, 1), hurst=(0.4, 0.6), rho=0.5)
    with pytest.raises(UnsupportedParameterError):
        mfgn_cov(0, 1, 1, 1.0, p)
    # the self pair at H = 1/2 sums to one as well but is classical white noise
    q = ModelParams.univariate(alpha=1.0, nu=1.0, hurst=0.5)
    assert mfgn_cov(0, 0, 0, 1.0, q) == 1.0


def test_block_covariance_psd_on_admissible_grid():
    rng = np.random.default_rng(11)
    for _ in range(12):
        h1, h2 = rng.uniform(0.08, 0.9, 2)
        if abs(h1 + h2 - 1.0) < 0.03:
            continue
        rho = float(rng.uniform(-0.9, 0.9))
        eta = float(rng.uniform(-0.4, 0.4))
        if coherency(h1, h2, rho, eta) > 1.0:
            continue
        p = ModelParams.bivariate(alpha=(1, 1), nu=(1, 1), hurst=(h1, h2), rho=rho, eta=eta)
        w = np.linalg.eigvalsh(increment_block_covariance(p, m=256))
        assert w[0] >= -1e-8 * abs(w[-1])


# --- serialization ----------------------------------------------------------------


finite_float = st.floats(min_value=-1e12, max_value=1e12, allow_nan=False, allow_infinity=False)


@settings(max_examples=50, deadline=None)
@given(
    alpha=st.tuples(finite_float.filter(lambda x: x > 1e-8), finite_float.filter(lambda x: x > 1e-8)),
    hurst=st.tuples(st.floats(0.01, 0.99), st.floats(0.01, 0.99)),
    rho=st.floats(-1.0, 1.0),
    eta=st.floats(-2.0, 2.0),
    mu=st.tuples(finite_float, finite_float),
)
def test_keyvalues_roundtrip_bit_exact(alpha, hurst, rho, eta, mu):
    p = ModelParams.bivariate(alpha=alpha, nu=(0.5, 2.0), hurst=hurst, rho=rho, eta=eta, mu=mu)
    q = ModelParams.from_keyvalues(p.to_keyvalues())
    for name in ("alpha", "nu", "mu", "hurst", "rho", "eta"):
        assert np.array_equal(getattr(p, name), getattr(q, name)), name


def test_csv_row_roundtrip(asym_params):
    header, row = asym_params.to_csv_row()
    q = ModelParams.from_csv_row(header, row)
    assert np.array_equal(q.eta, asym_params.eta)
    assert header[0] == "n" and header[1] == "alpha.1"
