"""Exact sampling of the driving noise and pathwise simulation of the model.

Simulation follows the classical recipe for stationary Gaussian sequences:
embed the block-Toeplitz increment covariance in a block-circulant matrix
(Wood & Chan 1994, extended to vector sequences), diagonalize it by FFT into
one Hermitian PSD matrix per Fourier frequency, draw complex normals through
the per-frequency matrix square roots, and transform back.  Real and
imaginary parts of the synthesis are two independent draws; one call to the
sampler can therefore serve two replications.

The model path itself comes from an explicit Euler recursion on a fine mesh
delta, warmed up over an initial stretch that is discarded, then subsampled
to the observation mesh:

  1. simulate on [0, T*] at mesh delta, T* > T;
  2. draw the noise increments exactly (circulant embedding);
  3. Y_{jd} = Y_{(j-1)d} + alpha (mu - Y_{(j-1)d}) d + nu dW, with Y_0 from
     the stationary Gaussian law N(mu, [ccf_zero(i, j)]);
  4. drop the first (T* - T)/delta steps and keep every (Delta/delta)-th
     point, n = T/Delta + 1 observations.

Seed discipline: all randomness flows from numpy's SeedSequence.  A
simulation with seed s uses SeedSequence((s, 0)) for the noise and
SeedSequence((s, 1)) for the initial condition, so the noise draw can be
reproduced independently of the path.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.signal

from .covariance import stationary_covariance
from .errors import CoherencyError, SimulationError
from .model import ModelParams, mfgn_cov_blocks, validate_params

__all__ = ["SimConfig", "PathPanel", "CirculantEmbedding", "sample_mfgn", "simulate_mfou"]

_PSD_REJECT_TOL = 1e-10


def _ratio_as_int(num: float, den: float, what: str) -> int:
    r = num / den
    m = int(round(r))
    if m <= 0 or abs(r - m) > 1e-9 * max(1.0, abs(r)):
        raise ValueError(f"{what} must be a positive integer, got {r}")
    return m


@dataclass(frozen=True)
class SimConfig:
    """Mesh and horizon configuration; defaults mirror daily data over 20 years.

    delta_fine : Euler mesh (time units)
    delta_obs  : observation spacing, integer multiple of delta_fine
    horizon    : retained span T; n = T/delta_obs + 1 observations
    warmup_horizon : total simulated span T* >= T; the first T* - T is dropped
    psd_fix    : 'clip' floors negative embedding eigenvalues at zero and
                 reports the clipped mass; 'reject' raises instead
    """

    delta_fine: float = 1.0 / (252 * 2**10)
    delta_obs: float = 1.0 / 252
    horizon: float = 20.0
    warmup_horizon: float = 28.0
    seed: int = 0
    psd_fix: str = "clip"

    def __post_init__(self):
        if self.delta_fine <= 0 or self.delta_obs < self.delta_fine:
            raise ValueError("need 0 < delta_fine <= delta_obs")
        if self.warmup_horizon < self.horizon:
            raise ValueError("warmup_horizon must be >= horizon")
        if self.psd_fix not in ("clip", "reject"):
            raise ValueError("psd_fix must be 'clip' or 'reject'")
        self.subsample  # validate ratios eagerly
        self.n_obs
        self.n_warmup_steps

    @property
    def subsample(self) -> int:
        return _ratio_as_int(self.delta_obs, self.delta_fine, "delta_obs/delta_fine")

    @property
    def n_obs(self) -> int:
        return _ratio_as_int(self.horizon, self.delta_obs, "horizon/delta_obs")

    @property
    def n_fine_steps(self) -> int:
        return _ratio_as_int(self.warmup_horizon, self.delta_fine, "warmup_horizon/delta_fine")

    @property
    def n_warmup_steps(self) -> int:
        if self.warmup_horizon == self.horizon:
            return 0
        return _ratio_as_int(self.warmup_horizon - self.horizon, self.delta_fine, "(warmup-horizon)/delta_fine")

    def to_keyvalues(self) -> dict[str, str]:
        return {
            "sim.delta_fine": repr(self.delta_fine),
            "sim.delta_obs": repr(self.delta_obs),
            "sim.horizon": repr(self.horizon),
            "sim.warmup_horizon": repr(self.warmup_horizon),
            "sim.seed": str(self.seed),
            "sim.psd_fix": self.psd_fix,
        }


@dataclass
class PathPanel:
    """Multivariate series on a common time grid with a missing-value mask."""

    times: np.ndarray          # (n,)
    values: np.ndarray         # (N, n)
    mask: np.ndarray           # (N, n) bool, True = missing
    meta: dict = field(default_factory=dict)
    names: Optional[list[str]] = None
    dates: Optional[list[str]] = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        self.mask = np.atleast_2d(np.asarray(self.mask, dtype=bool))
        if self.values.shape != self.mask.shape or self.values.shape[1] != self.times.shape[0]:
            raise ValueError("inconsistent panel dimensions")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    @property
    def n_series(self) -> int:
        return self.values.shape[0]

    @property
    def n_obs(self) -> int:
        return self.values.shape[1]


def params_digest(params: ModelParams) -> str:
    doc = params.to_keyvalues()
    blob = "\n".join(f"{k}={doc[k]}" for k in sorted(doc))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


class CirculantEmbedding:
    """Block-circulant spectral factorization of the noise increment covariance.

    Setup cost is dominated by N^2 FFTs of the embedding length plus one
    batched Hermitian eigendecomposition; the factorization is reused across
    draws.  Eigendecomposition (rather than Cholesky) tolerates the singular
    blocks produced by clipping.
    """

    def __init__(self, params: ModelParams, n_steps: int, delta: float, psd_fix: str = "clip"):
        report = validate_params(params)
        hard = [v for v in report.violations if v.constraint not in ("alpha positive",)]
        if hard:
            raise CoherencyError("invalid noise parameters: " + "; ".join(map(str, hard)))
        if psd_fix not in ("clip", "reject"):
            raise ValueError("psd_fix must be 'clip' or 'reject'")
        self.params = params
        self.n_steps = int(n_steps)
        self.delta = float(delta)
        self.n_dim = params.n
        m_len = 1 << int(np.ceil(np.log2(max(2 * self.n_steps, 2))))
        factor, clipped_abs, total_abs, min_eig = self._factor(m_len)
        if min_eig < -_PSD_REJECT_TOL * max(total_abs / m_len, 1e-300):
            # one doubling before applying the policy
            m_len *= 2
            factor, clipped_abs, total_abs, min_eig = self._factor(m_len)
            if min_eig < -_PSD_REJECT_TOL * max(total_abs / m_len, 1e-300) and psd_fix == "reject":
                raise SimulationError(
                    f"embedding spectrum not PSD (min eigenvalue {min_eig:.3e}) under psd_fix='reject'"
                )
        self.m_len = m_len
        self._factor_matrix = factor
        self.clipped_mass = float(clipped_abs)
        self.clipped_mass_rel = float(clipped_abs / total_abs) if total_abs > 0 else 0.0
        self.min_spectral_eig = float(min_eig)

    def _factor(self, m_len: int):
        m = np.arange(m_len)
        lag = np.where(m <= m_len // 2, m, m - m_len).astype(float)
        blocks = mfgn_cov_blocks(lag, self.params, self.delta)
        # the wrap point m_len/2 carries both +lag and -lag; symmetrize to keep spectra Hermitian
        blocks[m_len // 2] = 0.5 * (blocks[m_len // 2] + blocks[m_len // 2].T)
        spectra = np.fft.fft(blocks, axis=0)
        vals, vecs = np.linalg.eigh(spectra)
        min_eig = float(vals.min())
        neg = np.clip(vals, None, 0.0)
        clipped_abs = abs(float(neg.sum()))
        total_abs = float(np.abs(vals).sum())
        vals = np.clip(vals, 0.0, None)
        factor = vecs * np.sqrt(vals)[:, None, :]
        return factor, clipped_abs, total_abs, min_eig

    def sample_pair(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Two independent (N, n_steps) draws from one complex synthesis."""
        m_len, n = self.m_len, self.n_dim
        z = rng.standard_normal((m_len, n)) + 1j * rng.standard_normal((m_len, n))
        u = np.einsum("mab,mb->ma", self._factor_matrix, z)
        del z
        out_re = np.empty((n, self.n_steps))
        out_im = np.empty((n, self.n_steps))
        for a in range(n):
            y = np.fft.ifft(u[:, a]) * np.sqrt(m_len)
            out_re[a] = y[: self.n_steps].real
            out_im[a] = y[: self.n_steps].imag
        return out_re, out_im


_EMBED_CACHE: dict[tuple, CirculantEmbedding] = {}


def _embedding_for(params: ModelParams, n_steps: int, delta: float, psd_fix: str) -> CirculantEmbedding:
    key = (
        params.hurst.tobytes(),
        params.rho.tobytes(),
        params.eta.tobytes(),
        int(n_steps),
        float(delta),
        psd_fix,
    )
    emb = _EMBED_CACHE.get(key)
    if emb is None:
        emb = CirculantEmbedding(params, n_steps, delta, psd_fix)
        if len(_EMBED_CACHE) >= 4:
            _EMBED_CACHE.pop(next(iter(_EMBED_CACHE)))
        _EMBED_CACHE[key] = emb
    return emb


def sample_mfgn(
    params: ModelParams,
    n_steps: int,
    delta: float,
    seed: int,
    psd_fix: str = "clip",
) -> np.ndarray:
    """One exact (N, n_steps) draw of the noise increments.

    Deterministic in (seed, params, n_steps, delta): the draw is the real
    part of the synthesis under SeedSequence((seed, 0)).
    """
    emb = _embedding_for(params, n_steps, delta, psd_fix)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0)))
    return emb.sample_pair(rng)[0]


def _euler_paths(
    params: ModelParams,
    noise: np.ndarray,
    y0: np.ndarray,
    delta: float,
) -> np.ndarray:
    n, n_steps = noise.shape
    paths = np.empty((n, n_steps + 1))
    for i in range(n):
        phi = 1.0 - params.alpha[i] * delta
        drive = params.alpha[i] * params.mu[i] * delta + params.nu[i] * noise[i]
        out = scipy.signal.lfilter([1.0], [1.0, -phi], drive, zi=np.array([phi * y0[i]]))[0]
        paths[i, 0] = y0[i]
        paths[i, 1:] = out
    return paths


def _draw_initial(params: ModelParams, rng: np.random.Generator) -> np.ndarray:
    if np.any(params.alpha == 0.0):
        # degenerate no-reversion limit: stationary law does not exist, start at the mean
        return params.mu.copy()
    cov = stationary_covariance(params)
    vals, vecs = np.linalg.eigh(cov)
    if vals.min() < -1e-10 * max(vals.max(), 1e-300):
        raise SimulationError(f"stationary covariance not PSD (min eigenvalue {vals.min():.3e})")
    root = vecs * np.sqrt(np.clip(vals, 0.0, None))
    return params.mu + root @ rng.standard_normal(params.n)


def simulate_mfou(params: ModelParams, cfg: SimConfig) -> PathPanel:
    """Simulate one panel of n = horizon/delta_obs + 1 observations.

    Hard precondition: the parameters validate (coherency included); a
    non-PSD covariance is unusable here, unlike in estimation contexts.
    Zero mean-reversion rates are accepted as the documented degenerate
    limit (the recursion collapses to Y_0 + nu * W).
    """
    report = validate_params(params)
    hard = [
        v
        for v in report.violations
        if not (v.constraint == "alpha positive" and v.value == 0.0)
    ]
    if hard:
        raise CoherencyError("simulation requires valid parameters: " + "; ".join(map(str, hard)))

    emb = _embedding_for(params, cfg.n_fine_steps, cfg.delta_fine, cfg.psd_fix)
    rng_noise = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0)))
    rng_init = np.random.default_rng(np.random.SeedSequence((cfg.seed, 1)))
    noise = emb.sample_pair(rng_noise)[0]
    y0 = _draw_initial(params, rng_init)
    paths = _euler_paths(params, noise, y0, cfg.delta_fine)
    kept = paths[:, cfg.n_warmup_steps :]
    values = kept[:, :: cfg.subsample].copy()
    n_obs = cfg.n_obs
    values = values[:, : n_obs + 1]
    times = np.arange(n_obs + 1) * cfg.delta_obs
    meta = {
        "seed": cfg.seed,
        "params_digest": params_digest(params),
        "clipped_mass": emb.clipped_mass,
        "clipped_mass_rel": emb.clipped_mass_rel,
        "embedding_length": emb.m_len,
        "min_spectral_eig": emb.min_spectral_eig,
    }
    meta.update(cfg.to_keyvalues())
    return PathPanel(
        times=times,
        values=values,
        mask=np.zeros_like(values, dtype=bool),
        meta=meta,
    )
