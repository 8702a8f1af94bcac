"""Model parameters, admissibility checks, and the driving-noise covariance kernel.

The process is an N-dimensional mean-reverting diffusion whose component i is
driven by a fractional Brownian motion with Hurst exponent ``hurst[i]``;
cross-dependence between driving motions is parametrized by a correlation
matrix ``rho`` (symmetric, unit diagonal) and an asymmetry matrix ``eta``
(antisymmetric, zero diagonal).  Not every (H, rho, eta) combination yields a
valid joint Gaussian law: each pair must satisfy a coherency constraint
``coherency(H_i, H_j, rho_ij, eta_ij) <= 1``.

``mfgn_cov`` is the covariance kernel of the unit-scale driving noise
increments over a uniform grid.  Its eta sign orientation is pinned by an
end-to-end requirement: with H_i + H_j < 1, a positive eta_ij must make the
stationary cross-covariance cov(Y^i_{t+k}, Y^j_t) decay faster in k than its
transpose.  The discretized-filter and simulation tests enforce this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import DimensionError, UnsupportedParameterError

__all__ = [
    "ModelParams",
    "Violation",
    "ValidationReport",
    "coherency",
    "validate_params",
    "mfgn_cov",
    "mfgn_cov_blocks",
    "DEFAULT_COHERENCY_TOL",
]

DEFAULT_COHERENCY_TOL = 1e-6


@dataclass(frozen=True)
class ModelParams:
    """Full parameter set of the N-component model.

    alpha : mean-reversion rates, > 0 (1/time)
    nu    : diffusion coefficients, > 0
    mu    : long-term means
    hurst : Hurst exponents, in (0, 1)
    rho   : contemporaneous correlation matrix of the driving motions
    eta   : antisymmetric asymmetry matrix of the driving motions
    """

    alpha: np.ndarray
    nu: np.ndarray
    mu: np.ndarray
    hurst: np.ndarray
    rho: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        for name in ("alpha", "nu", "mu", "hurst"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        for name in ("rho", "eta"):
            object.__setattr__(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))
        n = self.alpha.shape[0]
        for name in ("nu", "mu", "hurst"):
            if getattr(self, name).shape != (n,):
                raise DimensionError(f"{name} must have shape ({n},), got {getattr(self, name).shape}")
        for name in ("rho", "eta"):
            if getattr(self, name).shape != (n, n):
                raise DimensionError(f"{name} must have shape ({n}, {n}), got {getattr(self, name).shape}")

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    @classmethod
    def univariate(cls, alpha: float, nu: float, hurst: float, mu: float = 0.0) -> "ModelParams":
        return cls(
            alpha=np.array([alpha]),
            nu=np.array([nu]),
            mu=np.array([mu]),
            hurst=np.array([hurst]),
            rho=np.array([[1.0]]),
            eta=np.array([[0.0]]),
        )

    @classmethod
    def bivariate(
        cls,
        alpha: tuple[float, float],
        nu: tuple[float, float],
        hurst: tuple[float, float],
        rho: float,
        eta: float = 0.0,
        mu: tuple[float, float] = (0.0, 0.0),
    ) -> "ModelParams":
        return cls(
            alpha=np.asarray(alpha, dtype=float),
            nu=np.asarray(nu, dtype=float),
            mu=np.asarray(mu, dtype=float),
            hurst=np.asarray(hurst, dtype=float),
            rho=np.array([[1.0, rho], [rho, 1.0]]),
            eta=np.array([[0.0, eta], [-eta, 0.0]]),
        )

    def hurst_sum(self, i: int, j: int) -> float:
        return float(self.hurst[i] + self.hurst[j])

    # --- serialization -------------------------------------------------

    def to_keyvalues(self) -> dict[str, str]:
        """Flat dotted-key document; 1-based indices, shortest round-trip floats."""
        doc: dict[str, str] = {"n": str(self.n)}
        for name in ("alpha", "nu", "mu", "hurst"):
            vec = getattr(self, name)
            for i in range(self.n):
                doc[f"{name}.{i + 1}"] = repr(float(vec[i]))
        for i in range(self.n):
            for j in range(i + 1, self.n):
                doc[f"rho.{i + 1}.{j + 1}"] = repr(float(self.rho[i, j]))
                doc[f"eta.{i + 1}.{j + 1}"] = repr(float(self.eta[i, j]))
        return doc

    @classmethod
    def from_keyvalues(cls, doc: dict[str, str]) -> "ModelParams":
        n = int(doc["n"])
        vecs = {name: np.zeros(n) for name in ("alpha", "nu", "mu", "hurst")}
        for name, vec in vecs.items():
            for i in range(n):
                vec[i] = float(doc[f"{name}.{i + 1}"])
        rho = np.eye(n)
        eta = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                rho[i, j] = rho[j, i] = float(doc[f"rho.{i + 1}.{j + 1}"])
                eta[i, j] = float(doc[f"eta.{i + 1}.{j + 1}"])
                eta[j, i] = -eta[i, j]
        return cls(alpha=vecs["alpha"], nu=vecs["nu"], mu=vecs["mu"], hurst=vecs["hurst"], rho=rho, eta=eta)

    def to_csv_row(self) -> tuple[list[str], list[str]]:
        """(header, row) in the single-row layout used by estimator outputs."""
        doc = self.to_keyvalues()
        keys = sorted(doc, key=_key_order)
        return keys, [doc[k] for k in keys]

    @classmethod
    def from_csv_row(cls, header: list[str], row: list[str]) -> "ModelParams":
        return cls.from_keyvalues(dict(zip(header, row)))


def _key_order(key: str):
    rank = {"n": 0, "alpha": 1, "nu": 2, "mu": 3, "hurst": 4, "rho": 5, "eta": 6}
    parts = key.split(".")
    return (rank.get(parts[0], 99), *(int(p) for p in parts[1:]))


@dataclass(frozen=True)
class Violation:
    constraint: str
    where: tuple[int, ...]
    value: float

    def __str__(self) -> str:
        loc = ",".join(str(i + 1) for i in self.where)
        return f"{self.constraint}[{loc}]={self.value:.6g}"


@dataclass
class ValidationReport:
    ok: bool
    violations: list[Violation] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def coherency(h_i: float, h_j: float, rho_ij: float, eta_ij: float) -> float:
    """Pairwise admissibility functional; the pair is valid iff the value is <= 1.

    Spectral-domain squared coherence of the two driving motions, constant in
    frequency:

        Gamma(H+1)^2 [rho^2 sin^2(pi H/2) + eta^2 cos^2(pi H/2)]
        ------------------------------------------------------------   , H = H_i + H_j.
        Gamma(2H_i+1) Gamma(2H_j+1) sin(pi H_i) sin(pi H_j)

    The positive-semidefiniteness oracle in the test suite checks that the
    unit contour of this functional coincides with PSD-ness of the increment
    covariance truncated at 256 lags.
    """
    if not (0.0 < h_i < 1.0 and 0.0 < h_j < 1.0):
        raise UnsupportedParameterError(f"Hurst exponents must lie in (0, 1), got ({h_i}, {h_j})")
    hij = h_i + h_j
    num = gamma_fn(hij + 1.0) ** 2 * (
        rho_ij**2 * math.sin(math.pi * hij / 2.0) ** 2
        + eta_ij**2 * math.cos(math.pi * hij / 2.0) ** 2
    )
    den = (
        gamma_fn(2.0 * h_i + 1.0)
        * gamma_fn(2.0 * h_j + 1.0)
        * math.sin(math.pi * h_i)
        * math.sin(math.pi * h_j)
    )
    return float(num / den)


def validate_params(params: ModelParams, tol_coherency: float = DEFAULT_COHERENCY_TOL) -> ValidationReport:
    """Collect every structural violation and every incoherent pair.

    Pure: never mutates its input; calling twice returns equal reports.
    Dimension mismatches raise ``DimensionError`` at ``ModelParams``
    construction and so cannot reach this function.
    """
    v: list[Violation] = []
    n = params.n
    for i in range(n):
        if not params.alpha[i] > 0.0:
            v.append(Violation("alpha positive", (i,), float(params.alpha[i])))
        if not params.nu[i] > 0.0:
            v.append(Violation("nu positive", (i,), float(params.nu[i])))
        if not 0.0 < params.hurst[i] < 1.0:
            v.append(Violation("hurst range", (i,), float(params.hurst[i])))
    if not np.allclose(params.rho, params.rho.T, atol=1e-12):
        v.append(Violation("rho symmetric", (), float(np.abs(params.rho - params.rho.T).max())))
    for i in range(n):
        if abs(params.rho[i, i] - 1.0) > 1e-12:
            v.append(Violation("rho unit diagonal", (i,), float(params.rho[i, i])))
        if abs(params.eta[i, i]) > 1e-12:
            v.append(Violation("eta zero diagonal", (i,), float(params.eta[i, i])))
    bad_rho = np.abs(params.rho) > 1.0 + 1e-12
    for i, j in zip(*np.nonzero(bad_rho)):
        if i < j:
            v.append(Violation("rho range", (int(i), int(j)), float(params.rho[i, j])))
    if not np.allclose(params.eta, -params.eta.T, atol=1e-12):
        v.append(Violation("eta antisymmetric", (), float(np.abs(params.eta + params.eta.T).max())))

    hurst_ok = np.all((params.hurst > 0.0) & (params.hurst < 1.0))
    for i in range(n):
        for j in range(i + 1, n):
            hij = params.hurst_sum(i, j)
            if hij == 1.0:
                v.append(Violation("hurst sum equals one", (i, j), hij))
                continue
            if hurst_ok and abs(params.rho[i, j]) <= 1.0 + 1e-12:
                c = coherency(params.hurst[i], params.hurst[j], params.rho[i, j], params.eta[i, j])
                if c > 1.0 + tol_coherency:
                    v.append(Violation("coherency", (i, j), c))
    return ValidationReport(ok=not v, violations=v)


def _pair_structure(i: int, j: int, params: ModelParams) -> tuple[float, float, float]:
    """(hij, rho_ij, eta_ij) with the cross-pair hurst-sum guard."""
    hij = params.hurst_sum(i, j)
    if i != j and hij == 1.0:
        raise UnsupportedParameterError(
            f"H_{i + 1} + H_{j + 1} = 1 is outside the supported domain for cross pairs"
        )
    return hij, float(params.rho[i, j]), float(params.eta[i, j])


def mfgn_cov(i: int, j: int, h, delta: float, params: ModelParams) -> np.ndarray:
    """Covariance of unit-scale driving-noise increments at signed lag h.

    cov(W^{H_i}_{(k+h)d} - W^{H_i}_{(k+h-1)d},  W^{H_j}_{kd} - W^{H_j}_{(k-1)d})
      = 0.5 [phi(h-1) - 2 phi(h) + phi(h+1)] d^{H_i+H_j},
    phi(x) = (rho_ij + eta_ij sign(x)) |x|^{H_i+H_j}.

    The + orientation of eta in phi is the one under which the simulated
    process reproduces the closed-form cross-covariance asymmetry (see the
    module docstring); the raw opposite convention fails that check.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    hij, rho_ij, eta_ij = _pair_structure(i, j, params)
    h = np.asarray(h, dtype=float)

    def phi(x: np.ndarray) -> np.ndarray:
        return (rho_ij + eta_ij * np.sign(x)) * np.abs(x) ** hij

    return 0.5 * (phi(h - 1.0) - 2.0 * phi(h) + phi(h + 1.0)) * delta**hij


def mfgn_cov_blocks(lags, params: ModelParams, delta: float) -> np.ndarray:
    """Stacked (len(lags), N, N) kernel blocks r[h][a, b] = mfgn_cov(a, b, h)."""
    lags = np.asarray(lags, dtype=float)
    n = params.n
    out = np.empty((lags.shape[0], n, n))
    for a in range(n):
        for b in range(n):
            out[:, a, b] = mfgn_cov(a, b, lags, delta, params)
    return out
