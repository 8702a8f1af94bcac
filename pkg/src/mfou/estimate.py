"""Minimum-distance estimation from sample cross-covariances.

The estimator matches model cross-covariances at a lag set L to their sample
counterparts, stacked into one moment vector whose ordering is the single
source of truth shared by both sides:

  * for each series i in order, the L autocovariance lags;
  * for each pair i < j in lexicographic order, ccf(i, j, k) for k in L,
    then ccf(j, i, k) for k in L minus {0} (the lag-0 value is shared).

That gives N (L + (N - 1)(L - 1/2)) moments.  The parameter vector is
minimized with bound-constrained L-BFGS-B from a 2-step moment start, with
central finite differences for the gradient.  Two model-moment variants are
supported: the exact covariance, and the slow-mean-reversion approximation in
which the lag-0 covariances (V_i, C_ij) enter as free parameters and no
mean-reversion rates appear.

Sample means are taken out per series once, before anything else; sample
cross-covariances on gappy panels use all pairwise-complete index positions
and divide by the count actually used.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import gamma as gamma_fn

from .covariance import ccf_asymptotic, ccf_exact_lags, ccf_zero
from .errors import DataError, InitializerError
from .model import ModelParams, validate_params
from .simulate import PathPanel

__all__ = [
    "DEFAULT_LAGS",
    "LagSet",
    "MomentLayout",
    "sample_ccf",
    "sample_means",
    "assemble_sample_moments",
    "assemble_model_moments",
    "init_2step",
    "mde_loss",
    "EstimatorOptions",
    "EstimateResult",
    "mde_estimate",
    "mde_estimate_asymptotic",
    "mde_estimate_pairwise",
]

DEFAULT_LAGS = (0, 1, 2, 3, 4, 5, 20, 50)

_HURST_BARRIER_WIDTH = 1e-3
_HURST_BARRIER_SCALE = 1e4

DEFAULT_BOUNDS = {
    "alpha": (1e-4, 50.0),
    "nu": (1e-4, 10.0),
    "hurst": (0.01, 0.99),
    "rho": (-0.999, 0.999),
    "eta": (-2.0, 2.0),
    "v": (1e-6, 100.0),
    "c": (-100.0, 100.0),
}


@dataclass(frozen=True)
class LagSet:
    """Ordered distinct non-negative integer lags, in observation units; 0 included."""

    lags: tuple[int, ...] = DEFAULT_LAGS

    def __post_init__(self):
        lags = tuple(int(k) for k in self.lags)
        if len(lags) == 0 or lags[0] != 0:
            raise ValueError("lag set must start at 0")
        if any(b <= a for a, b in zip(lags, lags[1:])):
            raise ValueError("lags must be strictly increasing")
        object.__setattr__(self, "lags", lags)

    def __len__(self) -> int:
        return len(self.lags)

    def __iter__(self):
        return iter(self.lags)


@dataclass(frozen=True)
class MomentLayout:
    """Canonical (i, j, k) ordering of the stacked moment vector."""

    n_series: int
    lag_set: LagSet

    @property
    def entries(self) -> list[tuple[int, int, int]]:
        ent = []
        for i in range(self.n_series):
            ent.extend((i, i, k) for k in self.lag_set)
        for i in range(self.n_series):
            for j in range(i + 1, self.n_series):
                ent.extend((i, j, k) for k in self.lag_set)
                ent.extend((j, i, k) for k in self.lag_set.lags[1:])
        return ent

    def __len__(self) -> int:
        n, L = self.n_series, len(self.lag_set)
        return n * L + (n * (n - 1) // 2) * (2 * L - 1)


def sample_means(panel: PathPanel) -> np.ndarray:
    """Per-series means over non-missing values."""
    vals = np.where(panel.mask, np.nan, panel.values)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        mu = np.nanmean(vals, axis=1)
    if np.any(~np.isfinite(mu)):
        raise DataError("some series have no observed values")
    return mu


def sample_ccf(
    panel: PathPanel,
    i: int,
    j: int,
    k: int,
    means: Optional[np.ndarray] = None,
    min_overlap: Optional[int] = None,
) -> float:
    """Sample cross-covariance (1/n_used) sum (Y^i_{l+k} - mu_i)(Y^j_l - mu_j).

    k is a non-negative lag in observation units.  On complete panels n_used
    equals n - k; with gaps, only index positions where both observations
    exist contribute, and the divisor is the count actually used.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    mu = sample_means(panel) if means is None else means
    n = panel.n_obs
    if min_overlap is None:
        min_overlap = max(30, k + 2)
    xi = panel.values[i, k:n] - mu[i]
    xj = panel.values[j, : n - k] - mu[j]
    ok = ~(panel.mask[i, k:n] | panel.mask[j, : n - k])
    count = int(ok.sum())
    if count < min_overlap:
        raise DataError(f"pair ({i + 1},{j + 1}) lag {k}: only {count} overlapping observations (need {min_overlap})")
    return float(np.dot(xi[ok], xj[ok]) / count)


def assemble_sample_moments(panel: PathPanel, lags: LagSet, min_overlap: Optional[int] = None) -> np.ndarray:
    """Sample moment vector in the canonical ordering; means computed once."""
    mu = sample_means(panel)
    layout = MomentLayout(panel.n_series, lags)
    out = np.empty(len(layout))
    for m, (i, j, k) in enumerate(layout.entries):
        out[m] = sample_ccf(panel, i, j, k, means=mu, min_overlap=min_overlap)
    return out


def assemble_model_moments(
    params: ModelParams,
    lags: LagSet,
    delta: float,
    variant: str = "exact",
    v: Optional[np.ndarray] = None,
    c: Optional[np.ndarray] = None,
    tol: float = 1e-7,
) -> np.ndarray:
    """Model moment vector at continuous lags k * delta, canonical ordering.

    variant 'exact' evaluates the closed-form covariance; 'asymptotic' uses
    the slow-mean-reversion approximation with supplied lag-0 levels v (per
    series) and c (per pair, symmetric matrix).
    """
    n = params.n
    layout = MomentLayout(n, lags)
    lag_arr = np.asarray(lags.lags, dtype=float) * delta
    lag_tail = lag_arr[1:]
    pieces: list[np.ndarray] = []
    if variant == "exact":
        for i in range(n):
            pieces.append(ccf_exact_lags(i, i, lag_arr, params, tol))
        for i in range(n):
            for j in range(i + 1, n):
                pieces.append(ccf_exact_lags(i, j, lag_arr, params, tol))
                pieces.append(ccf_exact_lags(j, i, lag_tail, params, tol))
    elif variant == "asymptotic":
        if v is None or c is None:
            raise ValueError("asymptotic variant needs the free lag-0 levels v and c")
        for i in range(n):
            pieces.append(ccf_asymptotic(i, i, lag_arr, float(v[i]), params))
        for i in range(n):
            for j in range(i + 1, n):
                pieces.append(ccf_asymptotic(i, j, lag_arr, float(c[i, j]), params))
                pieces.append(ccf_asymptotic(j, i, lag_tail, float(c[i, j]), params))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    out = np.concatenate(pieces)
    assert out.shape[0] == len(layout)
    return out


# --- 2-step starting values ---------------------------------------------


def _second_difference_meansq(y: np.ndarray, mask: np.ndarray, step: int) -> float:
    d = y[2 * step :] - 2.0 * y[step : -step] + y[: -2 * step]
    ok = ~(mask[2 * step :] | mask[step : -step] | mask[: -2 * step])
    if ok.sum() < 10:
        raise InitializerError(f"too few complete second differences at step {step}")
    return float(np.mean(d[ok] ** 2))


def init_2step(panel: PathPanel, delta: float) -> ModelParams:
    """Moment-based starting values: per-series scaling stage, then pairwise stage.

    Per series, the Hurst exponent comes from the dyadic ratio of mean squared
    second-order increments, H = 0.5 log2(V(2d)/V(d)); the diffusion scale
    from V(d) = nu^2 (4 - 2^{2H}) d^{2H}; the reversion rate from inverting
    the stationary variance.  Per pair, the lag-1 drop of the two directed
    cross-covariances identifies rho + eta and rho - eta through the
    small-alpha expansion at k = delta.
    """
    if panel.n_obs < 100:
        raise InitializerError("need at least 100 observations per series")
    n = panel.n_series
    mu = sample_means(panel)
    hurst = np.empty(n)
    nu = np.empty(n)
    alpha = np.empty(n)
    g0 = np.empty(n)
    for i in range(n):
        v1 = _second_difference_meansq(panel.values[i], panel.mask[i], 1)
        v2 = _second_difference_meansq(panel.values[i], panel.mask[i], 2)
        if v1 <= 0.0 or v2 <= 0.0:
            raise InitializerError(f"series {i + 1}: degenerate second-difference variance")
        h = float(np.clip(0.5 * np.log2(v2 / v1), 0.01, 0.99))
        nu2 = v1 / ((4.0 - 2.0 ** (2.0 * h)) * delta ** (2.0 * h))
        g0[i] = sample_ccf(panel, i, i, 0, means=mu, min_overlap=30)
        if g0[i] <= 0.0 or nu2 <= 0.0:
            raise InitializerError(f"series {i + 1}: non-positive variance")
        hurst[i] = h
        nu[i] = np.sqrt(nu2)
        alpha[i] = (nu2 * gamma_fn(2.0 * h + 1.0) / (2.0 * g0[i])) ** (1.0 / (2.0 * h))
    rho = np.eye(n)
    eta = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            hij = hurst[i] + hurst[j]
            scale = nu[i] * nu[j] * delta**hij
            fwd = 2.0 * (sample_ccf(panel, i, j, 0, means=mu) - sample_ccf(panel, i, j, 1, means=mu)) / scale
            bwd = 2.0 * (sample_ccf(panel, j, i, 0, means=mu) - sample_ccf(panel, j, i, 1, means=mu)) / scale
            rho[i, j] = rho[j, i] = float(np.clip(0.5 * (fwd + bwd), -0.999, 0.999))
            eta[i, j] = 0.5 * (fwd - bwd)
            eta[j, i] = -eta[i, j]
    lo, hi = DEFAULT_BOUNDS["alpha"]
    alpha = np.clip(alpha, lo, hi)
    lo, hi = DEFAULT_BOUNDS["eta"]
    eta = np.clip(eta, lo, hi)
    np.fill_diagonal(eta, 0.0)
    eta = 0.5 * (eta - eta.T)
    return ModelParams(alpha=alpha, nu=nu, mu=mu, hurst=hurst, rho=rho, eta=eta)


def _fallback_init(panel: PathPanel, delta: float) -> ModelParams:
    n = panel.n_series
    mu = sample_means(panel)
    h = 0.3
    g0 = np.array([sample_ccf(panel, i, i, 0, means=mu, min_overlap=10) for i in range(n)])
    g0 = np.maximum(g0, 1e-8)
    nu = np.sqrt(2.0 * g0 * 1.0 ** (2 * h) / gamma_fn(2 * h + 1.0))
    return ModelParams(
        alpha=np.ones(n),
        nu=nu,
        mu=mu,
        hurst=np.full(n, h),
        rho=np.eye(n),
        eta=np.zeros((n, n)),
    )


# --- parameter vector packing ---------------------------------------------


@dataclass(frozen=True)
class _Packer:
    """Flattening of the free parameters for the optimizer.

    exact:      [alpha, nu, hurst, rho_ij (i<j), eta_ij (i<j)]
    asymptotic: [nu, hurst, rho_ij, eta_ij, v, c_ij]
    A causal constraint removes the eta block (eta is then a function of
    (hurst_i, hurst_j, rho_ij) inside the loss).
    """

    n: int
    variant: str = "exact"
    causal: bool = False
    bounds_map: dict = field(default_factory=lambda: dict(DEFAULT_BOUNDS))

    @property
    def pair_count(self) -> int:
        return self.n * (self.n - 1) // 2

    def names(self) -> list[str]:
        pairs = [(i, j) for i in range(self.n) for j in range(i + 1, self.n)]
        out = []
        if self.variant == "exact":
            out += [f"alpha.{i + 1}" for i in range(self.n)]
        out += [f"nu.{i + 1}" for i in range(self.n)]
        out += [f"hurst.{i + 1}" for i in range(self.n)]
        out += [f"rho.{i + 1}.{j + 1}" for i, j in pairs]
        if not self.causal:
            out += [f"eta.{i + 1}.{j + 1}" for i, j in pairs]
        if self.variant == "asymptotic":
            out += [f"v.{i + 1}" for i in range(self.n)]
            out += [f"c.{i + 1}.{j + 1}" for i, j in pairs]
        return out

    def bounds(self) -> list[tuple[float, float]]:
        b = self.bounds_map
        out = []
        if self.variant == "exact":
            out += [b["alpha"]] * self.n
        out += [b["nu"]] * self.n
        out += [b["hurst"]] * self.n
        out += [b["rho"]] * self.pair_count
        if not self.causal:
            out += [b["eta"]] * self.pair_count
        if self.variant == "asymptotic":
            out += [b["v"]] * self.n
            out += [b["c"]] * self.pair_count
        return out

    def pack(self, params: ModelParams, v: Optional[np.ndarray] = None, c: Optional[np.ndarray] = None) -> np.ndarray:
        iu = np.triu_indices(self.n, 1)
        parts = []
        if self.variant == "exact":
            parts.append(params.alpha)
        parts += [params.nu, params.hurst, params.rho[iu]]
        if not self.causal:
            parts.append(params.eta[iu])
        if self.variant == "asymptotic":
            parts += [np.asarray(v, dtype=float), np.asarray(c, dtype=float)[iu]]
        vec = np.concatenate(parts)
        lo = np.array([b[0] for b in self.bounds()])
        hi = np.array([b[1] for b in self.bounds()])
        return np.clip(vec, lo, hi)

    def unpack(self, vec: np.ndarray, mu: np.ndarray) -> tuple[ModelParams, Optional[np.ndarray], Optional[np.ndarray]]:
        n, p = self.n, self.pair_count
        iu = np.triu_indices(n, 1)
        pos = 0

        def take(count: int) -> np.ndarray:
            nonlocal pos
            out = vec[pos : pos + count]
            pos += count
            return out

        alpha = take(n) if self.variant == "exact" else np.ones(n)
        nu = take(n)
        hurst = take(n)
        rho = np.eye(n)
        rho[iu] = take(p)
        rho = rho + rho.T - np.diag(np.diag(rho))
        eta = np.zeros((n, n))
        if self.causal:
            from .spillover import causal_eta

            for a, b in zip(*iu):
                eta[a, b] = causal_eta(hurst[a], hurst[b], rho[a, b])
                eta[b, a] = -eta[a, b]
        else:
            eta[iu] = take(p)
            eta = eta - eta.T
        v = c = None
        if self.variant == "asymptotic":
            v = take(n).copy()
            c = np.zeros((n, n))
            c[iu] = take(p)
            c = c + c.T
            np.fill_diagonal(c, v)
        return ModelParams(alpha=alpha, nu=nu, mu=mu, hurst=hurst, rho=rho, eta=eta), v, c


def _hurst_barrier(params: ModelParams) -> tuple[ModelParams, float]:
    """Keep evaluations off the H_i + H_j = 1 hyperplane.

    Inside a band of width 1e-3 the pair's exponents are pushed to the band
    edge for evaluation and a smooth quadratic penalty (zero at the edge) is
    added, so line searches never evaluate the undefined formula and the
    loss stays continuous.
    """
    h = params.hurst.copy()
    pen = 0.0
    w = _HURST_BARRIER_WIDTH
    moved = False
    n = params.n
    for i in range(n):
        for j in range(i, n):
            gap = h[i] + h[j] - 1.0
            if abs(gap) < w:
                pen += _HURST_BARRIER_SCALE * ((w - abs(gap)) / w) ** 2
                shift = (w - abs(gap)) if gap >= 0 else -(w - abs(gap))
                if i == j:
                    h[i] += shift / 2.0
                else:
                    h[i] += shift / 2.0
                    h[j] += shift / 2.0
                moved = True
    if not moved:
        return params, 0.0
    return replace(params, hurst=h), pen


def mde_loss(
    params: ModelParams,
    gamma_hat: np.ndarray,
    lags: LagSet,
    delta: float,
    weight: Optional[np.ndarray] = None,
    variant: str = "exact",
    v: Optional[np.ndarray] = None,
    c: Optional[np.ndarray] = None,
    tol: float = 1e-7,
) -> float:
    """Quadratic moment distance (gamma_hat - gamma(theta))' W (gamma_hat - gamma(theta)).

    W defaults to the identity.  Evaluations inside the thin guard band
    around H_i + H_j = 1 return a smoothly inflated value rather than NaN.
    """
    safe, pen = _hurst_barrier(params)
    g = assemble_model_moments(safe, lags, delta, variant=variant, v=v, c=c, tol=tol)
    r = g - gamma_hat
    if weight is None:
        val = float(r @ r)
    else:
        val = float(r @ weight @ r)
    return val + pen


@dataclass
class EstimatorOptions:
    maxiter: int = 500
    ccf_tol: float = 1e-7
    weight: Optional[np.ndarray] = None
    causal: bool = False
    fallback_init: bool = True
    finite_diff_rel_step: float = 1e-6
    bounds: dict = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    min_overlap: Optional[int] = None
    gamma_override: Optional[np.ndarray] = None  # replace sample moments (what-if fits, tests)


@dataclass
class EstimateResult:
    params: ModelParams
    loss: float
    residuals: np.ndarray
    initial: ModelParams
    converged: bool
    diagnostics: dict
    v: Optional[np.ndarray] = None
    c: Optional[np.ndarray] = None


def _run_mde(
    panel: PathPanel,
    lags: LagSet,
    delta: float,
    opts: EstimatorOptions,
    variant: str,
) -> EstimateResult:
    if opts.gamma_override is not None:
        gamma_hat = np.asarray(opts.gamma_override, dtype=float)
        if gamma_hat.shape[0] != len(MomentLayout(panel.n_series, lags)):
            raise ValueError("gamma_override length does not match the moment layout")
    else:
        gamma_hat = assemble_sample_moments(panel, lags, min_overlap=opts.min_overlap)
    mu = sample_means(panel)
    try:
        start = init_2step(panel, delta)
    except InitializerError:
        if not opts.fallback_init:
            raise
        start = _fallback_init(panel, delta)
    packer = _Packer(n=panel.n_series, variant=variant, causal=opts.causal, bounds_map=opts.bounds)
    layout = MomentLayout(panel.n_series, lags)
    if variant == "asymptotic":
        g0_idx = {e: m for m, e in enumerate(layout.entries)}
        v0 = np.array([gamma_hat[g0_idx[(i, i, 0)]] for i in range(panel.n_series)])
        v0 = np.maximum(v0, 1e-6)
        c0 = np.zeros((panel.n_series, panel.n_series))
        for i in range(panel.n_series):
            for j in range(i + 1, panel.n_series):
                c0[i, j] = c0[j, i] = gamma_hat[g0_idx[(i, j, 0)]]
        x0 = packer.pack(start, v=v0, c=c0)
    else:
        x0 = packer.pack(start)

    def objective(x: np.ndarray) -> float:
        p, v, c = packer.unpack(x, mu)
        return mde_loss(p, gamma_hat, lags, delta, weight=opts.weight, variant=variant, v=v, c=c, tol=opts.ccf_tol)

    res = minimize(
        objective,
        x0,
        method="L-BFGS-B",
        jac="3-point",
        bounds=packer.bounds(),
        options={"maxiter": opts.maxiter, "finite_diff_rel_step": opts.finite_diff_rel_step},
    )
    params_hat, v_hat, c_hat = packer.unpack(res.x, mu)
    model_g = assemble_model_moments(params_hat, lags, delta, variant=variant, v=v_hat, c=c_hat, tol=opts.ccf_tol)
    residuals = gamma_hat - model_g
    weight = opts.weight
    loss = float(residuals @ residuals) if weight is None else float(residuals @ weight @ residuals)
    bounds_arr = packer.bounds()
    active = [nm for nm, x, (lo, hi) in zip(packer.names(), res.x, bounds_arr) if x <= lo or x >= hi]
    post = validate_params(params_hat)
    coh_viol = [str(v) for v in post.violations if v.constraint == "coherency"]
    if coh_viol:
        warnings.warn("estimated parameters exceed the coherency bound: " + "; ".join(coh_viol))
    diagnostics = {
        "iterations": int(res.nit),
        "n_evaluations": int(res.nfev),
        "message": str(res.message),
        "active_bounds": active,
        "variant": variant,
        "causal": opts.causal,
        "coherency_violations": coh_viol,
        "param_names": packer.names(),
        "x": res.x.copy(),
    }
    return EstimateResult(
        params=params_hat,
        loss=loss,
        residuals=residuals,
        initial=start,
        converged=bool(res.success),
        diagnostics=diagnostics,
        v=v_hat,
        c=c_hat,
    )


def mde_estimate(panel: PathPanel, lags: LagSet | Sequence[int] = DEFAULT_LAGS, delta: float = 1.0 / 252, opts: Optional[EstimatorOptions] = None) -> EstimateResult:
    """Exact-covariance minimum-distance estimate from a panel."""
    lags = lags if isinstance(lags, LagSet) else LagSet(tuple(lags))
    return _run_mde(panel, lags, delta, opts or EstimatorOptions(), variant="exact")


def mde_estimate_asymptotic(panel: PathPanel, lags: LagSet | Sequence[int] = DEFAULT_LAGS, delta: float = 1.0 / 252, opts: Optional[EstimatorOptions] = None) -> EstimateResult:
    """Slow-mean-reversion variant: free lag-0 levels, no reversion rates."""
    lags = lags if isinstance(lags, LagSet) else LagSet(tuple(lags))
    return _run_mde(panel, lags, delta, opts or EstimatorOptions(), variant="asymptotic")


def mde_estimate_pairwise(panel: PathPanel, lags: LagSet | Sequence[int] = DEFAULT_LAGS, delta: float = 1.0 / 252, opts: Optional[EstimatorOptions] = None) -> EstimateResult:
    """Pairwise convenience mode for large panels (not the joint estimator).

    Marginal parameters come from per-series univariate fits; each pair's
    (rho, eta) is then fit separately with the marginals held fixed.  Cheaper
    than the joint problem and usually close to it, but the two are not the
    same estimator; results are labeled accordingly in the diagnostics.
    """
    lags = lags if isinstance(lags, LagSet) else LagSet(tuple(lags))
    opts = opts or EstimatorOptions()
    n = panel.n_series
    mu = sample_means(panel)
    singles: list[EstimateResult] = []
    for i in range(n):
        sub = PathPanel(
            times=panel.times,
            values=panel.values[i : i + 1],
            mask=panel.mask[i : i + 1],
            meta={},
        )
        singles.append(_run_mde(sub, lags, delta, opts, variant="exact"))
    alpha = np.array([r.params.alpha[0] for r in singles])
    nu = np.array([r.params.nu[0] for r in singles])
    hurst = np.array([r.params.hurst[0] for r in singles])
    rho = np.eye(n)
    eta = np.zeros((n, n))
    total_loss = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            rho[i, j], eta[i, j], pair_loss = _fit_pair(panel, i, j, alpha, nu, hurst, mu, lags, delta, opts)
            rho[j, i] = rho[i, j]
            eta[j, i] = -eta[i, j]
            total_loss += pair_loss
    params = ModelParams(alpha=alpha, nu=nu, mu=mu, hurst=hurst, rho=rho, eta=eta)
    initial = ModelParams(
        alpha=alpha,
        nu=nu,
        mu=mu,
        hurst=hurst,
        rho=np.eye(n),
        eta=np.zeros((n, n)),
    )
    gamma_hat = assemble_sample_moments(panel, lags, min_overlap=opts.min_overlap)
    model_g = assemble_model_moments(params, lags, delta, tol=opts.ccf_tol)
    residuals = gamma_hat - model_g
    return EstimateResult(
        params=params,
        loss=float(residuals @ residuals),
        residuals=residuals,
        initial=initial,
        converged=all(r.converged for r in singles),
        diagnostics={"mode": "pairwise", "variant": "exact", "causal": opts.causal, "pair_loss_sum": total_loss},
    )


def _fit_pair(panel, i, j, alpha, nu, hurst, mu, lags, delta, opts):
    lag_arr = np.asarray(lags.lags, dtype=float) * delta
    g_ij = np.array([sample_ccf(panel, i, j, k, means=mu, min_overlap=opts.min_overlap) for k in lags])
    g_ji = np.array([sample_ccf(panel, j, i, k, means=mu, min_overlap=opts.min_overlap) for k in lags.lags[1:]])
    target = np.concatenate([g_ij, g_ji])

    def pair_moments(r, e):
        p = ModelParams.bivariate(
            alpha=(alpha[i], alpha[j]),
            nu=(nu[i], nu[j]),
            hurst=(hurst[i], hurst[j]),
            rho=r,
            eta=e,
        )
        p, _pen = _hurst_barrier(p)
        m_ij = ccf_exact_lags(0, 1, lag_arr, p, opts.ccf_tol)
        m_ji = ccf_exact_lags(1, 0, lag_arr[1:], p, opts.ccf_tol)
        return np.concatenate([m_ij, m_ji])

    if opts.causal:
        from .spillover import causal_eta

        def obj(x):
            d = pair_moments(x[0], causal_eta(hurst[i], hurst[j], x[0])) - target
            return float(d @ d)

        res = minimize(obj, [0.0], method="L-BFGS-B", jac="3-point", bounds=[opts.bounds["rho"]])
        r = float(res.x[0])
        return r, float(causal_eta(hurst[i], hurst[j], r)), float(res.fun)

    def obj(x):
        d = pair_moments(x[0], x[1]) - target
        return float(d @ d)

    res = minimize(
        obj,
        [0.0, 0.0],
        method="L-BFGS-B",
        jac="3-point",
        bounds=[opts.bounds["rho"], opts.bounds["eta"]],
    )
    return float(res.x[0]), float(res.x[1]), float(res.fun)
