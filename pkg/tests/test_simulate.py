"""Exact noise sampling and path simulation."""

import numpy as np
import pytest

from mfou import (
    CirculantEmbedding,
    CoherencyError,
    ModelParams,
    SimConfig,
    ccf_exact,
    mfgn_cov,
    sample_mfgn,
    simulate_mfou,
    stationary_covariance,
)
from mfou.model import mfgn_cov_blocks

from oracles import filter_ccf

DELTA = 1.0 / 252


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(delta_fine=1 / 252, delta_obs=1 / 300)  # obs finer than mesh
    with pytest.raises(ValueError):
        SimConfig(delta_fine=1 / 500, delta_obs=1 / 252)  # non-integer ratio
    with pytest.raises(ValueError):
        SimConfig(horizon=10.0, warmup_horizon=5.0)
    with pytest.raises(ValueError):
        SimConfig(psd_fix="ignore")
    cfg = SimConfig(delta_fine=DELTA / 32, delta_obs=DELTA, horizon=4.0, warmup_horizon=5.0)
    assert cfg.subsample == 32 and cfg.n_obs == 4 * 252


def test_determinism_and_seed_sensitivity(panel_a_params, quick_sim):
    a = simulate_mfou(panel_a_params, quick_sim)
    b = simulate_mfou(panel_a_params, quick_sim)
    assert np.array_equal(a.values, b.values)
    other = SimConfig(**{**quick_sim.__dict__, "seed": quick_sim.seed + 1})
    c = simulate_mfou(panel_a_params, other)
    assert not np.allclose(a.values, c.values)


def test_noise_determinism(panel_a_params):
    x = sample_mfgn(panel_a_params, 256, DELTA, seed=5)
    y = sample_mfgn(panel_a_params, 256, DELTA, seed=5)
    assert np.array_equal(x, y)
    assert x.shape == (2, 256)


def test_white_noise_reduction():
    p = ModelParams.univariate(alpha=1.0, nu=1.0, hurst=0.5)
    n = 2**14
    x = sample_mfgn(p, n, DELTA, seed=1)[0]
    assert x.var() == pytest.approx(DELTA, rel=0.05)
    lag1 = np.dot(x[1:], x[:-1]) / (n - 1) / x.var()
    assert abs(lag1) < 3.0 / np.sqrt(n)


def test_uncorrelated_components():
    p = ModelParams.bivariate(alpha=(1, 1), nu=(1, 1), hurst=(0.2, 0.3), rho=0.0, eta=0.0)
    n = 2**14
    x = sample_mfgn(p, n, DELTA, seed=2)
    scale = np.sqrt(x[0].var() * x[1].var())
    for h in range(0, 4):
        cc = np.dot(x[0, h:], x[1, : n - h]) / (n - h) / scale
        assert abs(cc) < 4.0 / np.sqrt(n)


def test_sample_covariance_matches_kernel(asym_params):
    """Lag 0..5 sample cross-covariances of the noise vs the analytic kernel, 4 MC s.e."""
    n, n_lags = 2048, 6
    emb = CirculantEmbedding(asym_params, n, DELTA)
    rng = np.random.default_rng(99)
    reps = 240
    acc = np.zeros((n_lags, 2, 2))
    acc2 = np.zeros((n_lags, 2, 2))
    for _ in range(reps // 2):
        for x in emb.sample_pair(rng):
            for h in range(n_lags):
                m = x[:, h:] @ x[:, : n - h].T / (n - h)
                acc[h] += m
                acc2[h] += m**2
    avg = acc / reps
    se = np.sqrt((acc2 / reps - avg**2) / reps)
    truth = mfgn_cov_blocks(np.arange(n_lags), asym_params, DELTA)
    dev = np.abs(avg - truth) / se
    assert dev.max() < 4.0, f"max deviation {dev.max():.2f} mc standard errors"


def test_eta_sign_convention_against_closed_form(asym_params):
    """Deterministic sign lock: the stationary covariance of the Euler filter
    built on the noise kernel must reproduce the closed-form asymmetry
    orientation (positive eta accelerates the i->j side, k > 0)."""
    delta = DELTA / 256
    for k_obs in (1, 5):
        f_ij = filter_ccf(k_obs * 256, 0, 1, asym_params, delta)
        f_ji = filter_ccf(k_obs * 256, 1, 0, asym_params, delta)
        e_ij = ccf_exact(0, 1, k_obs * DELTA, asym_params)
        e_ji = ccf_exact(1, 0, k_obs * DELTA, asym_params)
        # positive eta => the i->j side sits strictly below the j->i side
        assert e_ij < e_ji and f_ij < f_ji
        # the filter's residual mesh bias must be far smaller than the asymmetry:
        # matching the swapped orientation instead would miss by ~|e_ij - e_ji|
        gap = abs(e_ij - e_ji)
        assert abs(f_ij - e_ij) < 0.1 * gap
        assert abs(f_ji - e_ji) < 0.1 * gap
        assert abs(f_ij - e_ji) > 0.8 * gap


def test_zero_reversion_collapses_to_driving_path():
    p = ModelParams.bivariate(alpha=(0.0, 0.0), nu=(0.7, 1.3), hurst=(0.2, 0.4), rho=0.5, mu=(0.3, -0.1))
    cfg = SimConfig(delta_fine=DELTA / 8, delta_obs=DELTA, horizon=1.0, warmup_horizon=1.0, seed=77)
    panel = simulate_mfou(p, cfg)
    noise = sample_mfgn(p, cfg.n_fine_steps, cfg.delta_fine, seed=77)
    walk = np.cumsum(noise, axis=1) * p.nu[:, None]
    expected = np.concatenate([np.zeros((2, 1)), walk], axis=1)[:, :: cfg.subsample] + p.mu[:, None]
    np.testing.assert_allclose(panel.values, expected[:, : cfg.n_obs + 1], atol=1e-12)


def test_stationary_mean_and_marginal_law(panel_a_params):
    p = ModelParams.bivariate(alpha=(1.32, 1.45), nu=(0.78, 0.79), hurst=(0.19, 0.21), rho=0.94, mu=(1.5, -2.0))
    cfg_base = SimConfig(delta_fine=DELTA / 8, delta_obs=DELTA, horizon=0.5, warmup_horizon=1.0)
    reps = 200
    finals = np.empty((reps, 2))
    for r in range(reps):
        cfg = SimConfig(**{**cfg_base.__dict__, "seed": 1000 + r})
        finals[r] = simulate_mfou(p, cfg).values[:, -1]
    cov0 = stationary_covariance(p)
    for i in range(2):
        se = np.sqrt(cov0[i, i] / reps)
        assert abs(finals[:, i].mean() - p.mu[i]) < 4 * se
        # distributional check on the exactly-stationary marginal
        z = (finals[:, i] - p.mu[i]) / np.sqrt(cov0[i, i])
        from mfou import normality_diagnostic

        assert normality_diagnostic(z) < 1.36 / np.sqrt(reps) * 1.8


@pytest.mark.slow
def test_subsampling_consistency(panel_a_params):
    """Halving the fine mesh moves lag covariances by less than the mc error."""

    def mean_gamma0(fine: int, seeds: range) -> tuple[float, float]:
        vals = []
        for s in seeds:
            cfg = SimConfig(delta_fine=DELTA / fine, delta_obs=DELTA, horizon=4.0, warmup_horizon=5.0, seed=s)
            v = simulate_mfou(panel_a_params, cfg).values
            x = v[0] - v[0].mean()
            vals.append(float(x @ x / x.size))
        arr = np.asarray(vals)
        return float(arr.mean()), float(arr.std(ddof=1) / np.sqrt(arr.size))

    m16, se16 = mean_gamma0(16, range(100, 160))
    m32, se32 = mean_gamma0(32, range(300, 360))
    assert abs(m16 - m32) < 3.0 * np.hypot(se16, se32)


def test_incoherent_parameters_rejected():
    bad = ModelParams.bivariate(alpha=(1, 1), nu=(1, 1), hurst=(0.2, 0.8), rho=0.99, eta=0.0)
    from mfou import coherency

    assert coherency(0.2, 0.8, 0.99, 0.0) > 1.0
    with pytest.raises(CoherencyError):
        sample_mfgn(bad, 128, DELTA, seed=0)
    with pytest.raises(CoherencyError):
        simulate_mfou(bad, SimConfig(delta_fine=DELTA / 8, delta_obs=DELTA, horizon=1.0, warmup_horizon=1.0))


def test_clipping_bookkeeping(panel_a_params, quick_sim):
    panel = simulate_mfou(panel_a_params, quick_sim)
    assert panel.meta["clipped_mass"] >= 0.0
    assert panel.meta["clipped_mass_rel"] == pytest.approx(0.0, abs=1e-12)
    assert panel.meta["embedding_length"] >= 2 * quick_sim.n_fine_steps


def test_panel_shape_matches_config(panel_a_params, quick_sim):
    panel = simulate_mfou(panel_a_params, quick_sim)
    assert panel.values.shape == (2, quick_sim.n_obs + 1)
    assert panel.times[0] == 0.0 and panel.times[-1] == pytest.approx(quick_sim.horizon)
    assert not panel.mask.any()
