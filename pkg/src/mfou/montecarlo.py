"""Replication harness: simulate -> estimate, aggregated like a bias table.

Replications are deterministic functions of a master seed.  Rule: the
synthesis for replication r is embedding pair p = r // 2 seeded with
SeedSequence((master_seed, p)); the real part of the synthesis drives even
replications, the imaginary part odd ones (the two parts are independent by
construction).  Any subset of replications is therefore reproducible without
running the rest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import ndtr

from .covariance import stationary_covariance
from .errors import DataError, SimulationError
from .estimate import EstimateResult, EstimatorOptions, LagSet, mde_estimate, mde_estimate_asymptotic
from .model import ModelParams
from .simulate import PathPanel, SimConfig, _draw_initial, _embedding_for, _euler_paths, params_digest

__all__ = ["McScenario", "McReport", "run_mc", "replication_panels", "kde_density", "normality_diagnostic"]


@dataclass(frozen=True)
class McScenario:
    params: ModelParams
    sim: SimConfig
    n_reps: int
    master_seed: int
    lags: LagSet = field(default_factory=LagSet)
    variant: str = "exact"            # 'exact' | 'asymptotic'
    drop_nonconverged: bool = False
    estimator: EstimatorOptions = field(default_factory=EstimatorOptions)

    def __post_init__(self):
        if self.n_reps < 2:
            raise ValueError("need at least 2 replications")
        if self.variant not in ("exact", "asymptotic"):
            raise ValueError("variant must be 'exact' or 'asymptotic'")


@dataclass
class McReport:
    names: list[str]
    true: np.ndarray
    estimates: np.ndarray          # (n_reps, n_params)
    converged: np.ndarray          # (n_reps,) bool
    meta: dict = field(default_factory=dict)

    @property
    def avg(self) -> np.ndarray:
        # exactly-rounded column sums: a degenerate column averages to its value
        n = self.estimates.shape[0]
        return np.array([math.fsum(col) / n for col in self.estimates.T])

    @property
    def std_err(self) -> np.ndarray:
        n = self.estimates.shape[0]
        avg = self.avg
        return np.sqrt(
            np.array([math.fsum((col - a) ** 2) for col, a in zip(self.estimates.T, avg)]) / (n - 1)
        )

    @property
    def bias(self) -> np.ndarray:
        return self.avg - self.true

    @property
    def standardized_errors(self) -> np.ndarray:
        """(theta_hat - theta_true) / mc standard error, per replication."""
        se = self.std_err
        se = np.where(se > 0, se, np.nan)
        return (self.estimates - self.true) / se

    def rows(self) -> list[tuple[str, float, float, float, float]]:
        return [
            (nm, float(t), float(a), float(s), float(b))
            for nm, t, a, s, b in zip(self.names, self.true, self.avg, self.std_err, self.bias)
        ]


def replication_panels(scenario: McScenario, pair_index: int) -> tuple[PathPanel, PathPanel]:
    """The two panels of replications (2 p, 2 p + 1) for pair index p."""
    params, cfg = scenario.params, scenario.sim
    emb = _embedding_for(params, cfg.n_fine_steps, cfg.delta_fine, cfg.psd_fix)
    rng = np.random.default_rng(np.random.SeedSequence((scenario.master_seed, pair_index)))
    noise_re, noise_im = emb.sample_pair(rng)
    panels = []
    for half, noise in enumerate((noise_re, noise_im)):
        y0 = _draw_initial(params, rng)
        paths = _euler_paths(params, noise, y0, cfg.delta_fine)
        kept = paths[:, cfg.n_warmup_steps :][:, :: cfg.subsample][:, : cfg.n_obs + 1]
        panels.append(
            PathPanel(
                times=np.arange(cfg.n_obs + 1) * cfg.delta_obs,
                values=kept.copy(),
                mask=np.zeros_like(kept, dtype=bool),
                meta={
                    "replication": 2 * pair_index + half,
                    "master_seed": scenario.master_seed,
                    "params_digest": params_digest(params),
                },
            )
        )
    return panels[0], panels[1]


def _true_vector(scenario: McScenario, names: list[str]) -> np.ndarray:
    p = scenario.params
    cov0 = stationary_covariance(p)
    vals = {}
    for i in range(p.n):
        vals[f"alpha.{i + 1}"] = p.alpha[i]
        vals[f"nu.{i + 1}"] = p.nu[i]
        vals[f"hurst.{i + 1}"] = p.hurst[i]
        vals[f"v.{i + 1}"] = cov0[i, i]
    for i in range(p.n):
        for j in range(i + 1, p.n):
            vals[f"rho.{i + 1}.{j + 1}"] = p.rho[i, j]
            vals[f"eta.{i + 1}.{j + 1}"] = p.eta[i, j]
            vals[f"c.{i + 1}.{j + 1}"] = cov0[i, j]
    return np.array([vals[nm] for nm in names])


def run_mc(scenario: McScenario, estimator_fn=None) -> McReport:
    """Run n_reps simulate -> estimate pipelines and aggregate.

    Non-converged optimizations are included and flagged (or dropped when
    the scenario says so); a simulation failure aborts with the offending
    replication recorded, since it means the scenario itself is unusable.
    ``estimator_fn(panel, lags, delta, opts)`` substitutes the estimation
    stage when given (harness sanity checks).
    """
    if estimator_fn is not None:
        estimator = estimator_fn
    else:
        estimator = mde_estimate if scenario.variant == "exact" else mde_estimate_asymptotic
    rows = []
    flags = []
    names: Optional[list[str]] = None
    r = 0
    pair = 0
    while r < scenario.n_reps:
        try:
            panels = replication_panels(scenario, pair)
        except SimulationError as exc:
            raise SimulationError(f"replication pair {pair} (seed ({scenario.master_seed},{pair})): {exc}") from exc
        for panel in panels:
            if r >= scenario.n_reps:
                break
            result: EstimateResult = estimator(panel, scenario.lags, scenario.sim.delta_obs, scenario.estimator)
            if names is None:
                names = result.diagnostics["param_names"]
            rows.append(result.diagnostics["x"])
            flags.append(result.converged)
            r += 1
        pair += 1
    estimates = np.asarray(rows)
    converged = np.asarray(flags, dtype=bool)
    if scenario.drop_nonconverged and converged.any():
        estimates = estimates[converged]
        kept = converged[converged]
    else:
        kept = converged
    report = McReport(
        names=list(names),
        true=_true_vector(scenario, names),
        estimates=estimates,
        converged=kept,
        meta={
            "master_seed": scenario.master_seed,
            "n_reps": scenario.n_reps,
            "n_nonconverged": int((~converged).sum()),
            "variant": scenario.variant,
            "params_digest": params_digest(scenario.params),
        },
    )
    return report


def kde_density(samples, grid) -> np.ndarray:
    """Gaussian-kernel density estimate on a grid, Silverman rule-of-thumb bandwidth.

    bw = 0.9 min(sd, iqr / 1.34) n^{-1/5}; the iqr arm is skipped when it
    degenerates to zero.  Requires at least 10 samples with positive spread.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 10:
        raise DataError("need at least 10 samples for a density estimate")
    sd = float(x.std(ddof=1))
    if sd <= 0.0:
        raise DataError("zero-variance sample has no density estimate")
    q75, q25 = np.percentile(x, [75, 25])
    iqr = q75 - q25
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    bw = 0.9 * spread * x.size ** (-0.2)
    grid = np.asarray(grid, dtype=float)
    z = (grid[:, None] - x[None, :]) / bw
    dens = np.exp(-0.5 * z**2).sum(axis=1) / (x.size * bw * np.sqrt(2.0 * np.pi))
    return dens


def normality_diagnostic(standardized_errors) -> float:
    """Kolmogorov-Smirnov sup-distance of the sample to the standard normal."""
    x = np.sort(np.asarray(standardized_errors, dtype=float))
    n = x.size
    if n < 30:
        raise DataError("need at least 30 samples for the normality diagnostic")
    cdf = ndtr(x)
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))
