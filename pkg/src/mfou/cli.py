"""Command-line interface.

Every subcommand reads a flat key=value config document (path from --config
or the MFOU_CONFIG environment variable), applies --set key=value overrides,
writes its artifacts into --out, and drops a manifest recording config hash,
input/output hashes, and seeds, sufficient to reproduce the run.

Exit status: 0 success, 1 data/numeric error (machine-readable record on
stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .covariance import ccf_asymptotic, ccf_exact_lags, ccf_zero, stationary_covariance
from .errors import MfouError
from .estimate import (
    EstimatorOptions,
    LagSet,
    mde_estimate,
    mde_estimate_asymptotic,
    mde_estimate_pairwise,
)
from .io import (
    RunManifest,
    ingest_rv,
    read_keyvalues,
    read_panel_csv,
    sha256_file,
    summarize_panel,
    write_csv,
    write_keyvalues,
    write_panel_csv,
)
from .model import ModelParams, validate_params
from .montecarlo import McScenario, kde_density, run_mc
from .simulate import SimConfig, simulate_mfou
from .spillover import causal_eta, g_matrix, psi_tilde, spillover_indices

_SUBCOMMANDS = ("simulate", "estimate", "estimate-asym", "mc", "cov", "spillover", "ingest", "summarize")


def _load_config(args) -> dict[str, str]:
    doc: dict[str, str] = {}
    path = args.config or os.environ.get("MFOU_CONFIG")
    if path:
        doc.update(read_keyvalues(path))
    for item in args.set or []:
        if "=" not in item:
            raise MfouError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        doc[key.strip()] = value.strip()
    return doc


def _sim_config(doc: dict[str, str]) -> SimConfig:
    defaults = SimConfig()
    return SimConfig(
        delta_fine=float(doc.get("sim.delta_fine", defaults.delta_fine)),
        delta_obs=float(doc.get("sim.delta_obs", defaults.delta_obs)),
        horizon=float(doc.get("sim.horizon", defaults.horizon)),
        warmup_horizon=float(doc.get("sim.warmup_horizon", defaults.warmup_horizon)),
        seed=int(doc.get("sim.seed", defaults.seed)),
        psd_fix=doc.get("sim.psd_fix", defaults.psd_fix),
    )


def _lag_set(doc: dict[str, str]) -> LagSet:
    raw = doc.get("est.lags", "0,1,2,3,4,5,20,50")
    return LagSet(tuple(int(tok) for tok in raw.split(",") if tok.strip() != ""))


def _estimator_options(doc: dict[str, str]) -> EstimatorOptions:
    opts = EstimatorOptions()
    opts.maxiter = int(doc.get("est.maxiter", opts.maxiter))
    opts.ccf_tol = float(doc.get("est.ccf_tol", opts.ccf_tol))
    opts.causal = doc.get("est.causal", "false").lower() in ("1", "true", "yes")
    if "est.min_overlap" in doc:
        opts.min_overlap = int(doc["est.min_overlap"])
    return opts


def _write_manifest(out: Path, name: str, command: str, config: dict, inputs: list[Path], outputs: list[Path], seeds: dict, extra: dict, started: float):
    manifest = RunManifest(
        command=command,
        config=config,
        inputs={str(p): sha256_file(p) for p in inputs},
        outputs={str(p): sha256_file(p) for p in outputs},
        seeds={k: str(v) for k, v in seeds.items()},
        extra={k: str(v) for k, v in extra.items()},
        started=started,
        elapsed=time.time() - started,
    )
    manifest.write(out / name)


def _cmd_simulate(args, doc):
    started = time.time()
    params = ModelParams.from_keyvalues(doc)
    cfg = _sim_config(doc)
    panel = simulate_mfou(params, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    panel_path = out / "panel.csv"
    write_panel_csv(panel, panel_path)
    _write_manifest(
        out,
        "simulate_manifest.txt",
        "simulate",
        doc,
        [],
        [panel_path],
        {"sim": cfg.seed},
        {
            "params_digest": panel.meta["params_digest"],
            "clipped_mass": panel.meta["clipped_mass"],
            "clipped_mass_rel": panel.meta["clipped_mass_rel"],
        },
        started,
    )
    return 0


def _run_estimation(args, doc, variant: str):
    started = time.time()
    panel = read_panel_csv(args.panel)
    lags = _lag_set(doc)
    delta = float(doc.get("est.delta", 1.0 / 252))
    opts = _estimator_options(doc)
    mode = doc.get("est.mode", "joint")
    if variant == "asymptotic":
        result = mde_estimate_asymptotic(panel, lags, delta, opts)
    elif mode == "pairwise":
        result = mde_estimate_pairwise(panel, lags, delta, opts)
    else:
        result = mde_estimate(panel, lags, delta, opts)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    theta_doc = result.params.to_keyvalues()
    theta_doc["loss"] = repr(result.loss)
    theta_doc["converged"] = str(result.converged).lower()
    if result.v is not None:
        for i, vi in enumerate(result.v):
            theta_doc[f"v.{i + 1}"] = repr(float(vi))
        for i in range(panel.n_series):
            for j in range(i + 1, panel.n_series):
                theta_doc[f"c.{i + 1}.{j + 1}"] = repr(float(result.c[i, j]))
    theta_path = out / "theta.txt"
    write_keyvalues(theta_path, theta_doc)
    from .estimate import MomentLayout

    layout = MomentLayout(panel.n_series, lags)
    res_path = out / "residuals.csv"
    write_csv(
        res_path,
        ["i", "j", "lag", "residual"],
        [(str(i + 1), str(j + 1), str(k), float(r)) for (i, j, k), r in zip(layout.entries, result.residuals)],
    )
    _write_manifest(
        out,
        "estimate_manifest.txt",
        f"estimate[{variant},{mode}]",
        doc,
        [Path(args.panel)],
        [theta_path, res_path],
        {},
        {
            "loss": result.loss,
            "converged": result.converged,
            "iterations": result.diagnostics.get("iterations", ""),
            "active_bounds": ";".join(result.diagnostics.get("active_bounds", [])),
            "coherency_violations": ";".join(result.diagnostics.get("coherency_violations", [])),
        },
        started,
    )
    return 0


def _cmd_mc(args, doc):
    started = time.time()
    params = ModelParams.from_keyvalues(doc)
    cfg = _sim_config(doc)
    scenario = McScenario(
        params=params,
        sim=cfg,
        n_reps=int(doc.get("mc.reps", 200)),
        master_seed=int(doc.get("mc.seed", 0)),
        lags=_lag_set(doc),
        variant=doc.get("mc.variant", "exact"),
        drop_nonconverged=doc.get("mc.drop_nonconverged", "false").lower() in ("1", "true", "yes"),
        estimator=_estimator_options(doc),
    )
    report = run_mc(scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / "mc_report.csv"
    write_csv(
        report_path,
        ["parameter", "true", "avg", "std_err", "bias"],
        [(nm, t, a, s, b) for nm, t, a, s, b in report.rows()],
    )
    se_path = out / "mc_standardized_errors.csv"
    write_csv(
        se_path,
        ["replication", "converged"] + report.names,
        [
            [str(r), str(bool(report.converged[r])).lower()] + [float(v) for v in report.standardized_errors[r]]
            for r in range(report.estimates.shape[0])
        ],
    )
    lo, hi, n_grid = (float(x) for x in doc.get("mc.density_grid", "-4,4,161").split(","))
    grid = np.linspace(lo, hi, int(n_grid))
    dens_rows = []
    if report.estimates.shape[0] >= 10:
        for c, nm in enumerate(report.names):
            if report.standardized_errors[:, c].std() == 0:
                continue
            dens = kde_density(report.standardized_errors[:, c], grid)
            dens_rows.extend([(nm, float(g), float(d)) for g, d in zip(grid, dens)])
    dens_path = out / "mc_density.csv"
    write_csv(dens_path, ["parameter", "x", "density"], dens_rows)
    _write_manifest(
        out,
        "mc_manifest.txt",
        "mc",
        doc,
        [],
        [report_path, se_path, dens_path],
        {"master": scenario.master_seed},
        {"n_nonconverged": report.meta["n_nonconverged"], "params_digest": report.meta["params_digest"]},
        started,
    )
    return 0


def _cmd_cov(args, doc):
    started = time.time()
    params = ModelParams.from_keyvalues(doc)
    i = int(doc.get("cov.i", 1)) - 1
    j = int(doc.get("cov.j", min(2, params.n))) - 1
    max_lag = int(doc.get("cov.max_lag", 50))
    delta = float(doc.get("est.delta", 1.0 / 252))
    ks = np.arange(max_lag + 1) * delta
    g_ij = ccf_exact_lags(i, j, ks, params)
    g_ji = ccf_exact_lags(j, i, ks, params)
    c0 = ccf_zero(i, j, params)
    a_ij = ccf_asymptotic(i, j, ks, c0, params)
    a_ji = ccf_asymptotic(j, i, ks, c0, params)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cov_path = out / "cov.csv"
    write_csv(
        cov_path,
        ["lag", "gamma_ij", "gamma_ji", "gamma_asym_ij", "gamma_asym_ji"],
        [(str(k), float(g_ij[k]), float(g_ji[k]), float(a_ij[k]), float(a_ji[k])) for k in range(max_lag + 1)],
    )
    _write_manifest(out, "cov_manifest.txt", "cov", doc, [], [cov_path], {}, {"i": i + 1, "j": j + 1}, started)
    return 0


def _cmd_spillover(args, doc):
    started = time.time()
    inputs = []
    if args.panel:
        panel = read_panel_csv(args.panel)
        inputs.append(Path(args.panel))
        opts = _estimator_options(doc)
        opts.causal = True
        lags = _lag_set(doc)
        delta = float(doc.get("est.delta", 1.0 / 252))
        if doc.get("est.mode", "joint") == "pairwise":
            result = mde_estimate_pairwise(panel, lags, delta, opts)
        else:
            result = mde_estimate(panel, lags, delta, opts)
        params = result.params
        names = panel.names or [f"y{i + 1}" for i in range(panel.n_series)]
    else:
        params = ModelParams.from_keyvalues(doc)
        names = [f"y{i + 1}" for i in range(params.n)]
    g = g_matrix(params.hurst, params.rho)
    psi = psi_tilde(g)
    table = spillover_indices(psi)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    psi_path = out / "psi.csv"
    write_csv(psi_path, ["symbol"] + names, [[names[r]] + [float(v) for v in psi[r]] for r in range(len(names))])
    idx_path = out / "indices.csv"
    rows = [[nm, float(table.received[i]), float(table.transmitted[i]), float(table.net[i])] for i, nm in enumerate(names)]
    write_csv(idx_path, ["symbol", "received", "transmitted", "net"], rows)
    edge_path = out / "net_pairwise_edges.csv"
    edges = []
    for a in range(len(names)):
        for b in range(len(names)):
            if a != b:
                edges.append([names[a], names[b], float(table.net_pairwise[a, b])])
    write_csv(edge_path, ["i", "j", "net_pairwise"], edges)
    _write_manifest(
        out,
        "spillover_manifest.txt",
        "spillover",
        doc,
        inputs,
        [psi_path, idx_path, edge_path],
        {},
        {"total": table.total},
        started,
    )
    return 0


def _cmd_ingest(args, doc):
    started = time.time()
    symbols = [s for s in doc.get("ingest.symbols", "").split(",") if s.strip()] or None
    date_range = None
    if "ingest.start" in doc or "ingest.end" in doc:
        date_range = (doc.get("ingest.start", "0000-00-00"), doc.get("ingest.end", "9999-99-99"))
    panel = ingest_rv(args.rv, symbols=symbols, date_range=date_range)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    panel_path = out / "panel.csv"
    write_panel_csv(panel, panel_path)
    _write_manifest(
        out,
        "ingest_manifest.txt",
        "ingest",
        doc,
        [Path(args.rv)],
        [panel_path],
        {},
        {"n_series": panel.n_series, "n_obs": panel.n_obs},
        started,
    )
    return 0


def _cmd_summarize(args, doc):
    started = time.time()
    panel = read_panel_csv(args.panel)
    stats = summarize_panel(panel)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "summary.csv"
    write_csv(
        path,
        ["symbol", "missing", "zeros", "mean", "sd", "min", "median", "max"],
        [
            (s["symbol"], str(s["missing"]), str(s["zeros"]), s["mean"], s["sd"], s["min"], s["median"], s["max"])
            for s in stats
        ],
    )
    _write_manifest(out, "summarize_manifest.txt", "summarize", doc, [Path(args.panel)], [path], {}, {}, started)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mfou", description="multivariate fractional OU volatility toolkit")
    parser.add_argument("--version", action="version", version=f"mfou {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value config document (default: $MFOU_CONFIG)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--out", default=".", help="output directory")

    common(sub.add_parser("simulate", help="simulate a panel"))
    p = sub.add_parser("estimate", help="minimum-distance estimation")
    common(p)
    p.add_argument("--panel", required=True)
    p = sub.add_parser("estimate-asym", help="slow-mean-reversion estimation variant")
    common(p)
    p.add_argument("--panel", required=True)
    common(sub.add_parser("mc", help="Monte Carlo replication study"))
    common(sub.add_parser("cov", help="tabulate model cross-covariances"))
    p = sub.add_parser("spillover", help="spillover indices (causal variant)")
    common(p)
    p.add_argument("--panel", help="estimate causal parameters from this panel first")
    p = sub.add_parser("ingest", help="ingest realized-variance CSV")
    common(p)
    p.add_argument("--rv", required=True)
    p = sub.add_parser("summarize", help="per-series panel statistics")
    common(p)
    p.add_argument("--panel", required=True)
    return parser


_DISPATCH = {
    "simulate": _cmd_simulate,
    "estimate": lambda a, d: _run_estimation(a, d, "exact"),
    "estimate-asym": lambda a, d: _run_estimation(a, d, "asymptotic"),
    "mc": _cmd_mc,
    "cov": _cmd_cov,
    "spillover": _cmd_spillover,
    "ingest": _cmd_ingest,
    "summarize": _cmd_summarize,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = _load_config(args)
        return _DISPATCH[args.command](args, doc)
    except MfouError as exc:
        sys.stderr.write(f"error.type = {type(exc).__name__}\nerror.message = {exc}\n")
        return 1
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error.type = {type(exc).__name__}\nerror.message = {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
