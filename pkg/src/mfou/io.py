"""Panel and document I/O: CSV panels, realized-variance ingestion, manifests.

All text artifacts are deterministic byte-for-byte given the same inputs:
keys are sorted, floats are written in shortest round-trip form, newlines
are '\\n'.  Panels round-trip bit-exactly for finite values and masks.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DataError
from .simulate import PathPanel

__all__ = [
    "read_keyvalues",
    "write_keyvalues",
    "write_panel_csv",
    "read_panel_csv",
    "ingest_rv",
    "summarize_panel",
    "missing_runs",
    "sha256_file",
    "RunManifest",
]

ANNUALIZATION = 252.0


def _fmt(x: float) -> str:
    return repr(float(x))


# --- flat key-value documents ----------------------------------------------


def read_keyvalues(path: str | Path) -> dict[str, str]:
    doc: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        doc[key.strip()] = value.strip()
    return doc


def write_keyvalues(path: str | Path, doc: dict[str, str]) -> None:
    lines = [f"{k} = {doc[k]}" for k in sorted(doc)]
    Path(path).write_text("\n".join(lines) + "\n")


# --- panel CSV --------------------------------------------------------------


def write_panel_csv(panel: PathPanel, path: str | Path) -> None:
    """Header 'date,<names...>' or 'time,<names...>'; empty cell = missing."""
    names = panel.names or [f"y{i + 1}" for i in range(panel.n_series)]
    use_dates = panel.dates is not None
    lines = [",".join(["date" if use_dates else "time"] + list(names))]
    for t in range(panel.n_obs):
        first = panel.dates[t] if use_dates else _fmt(panel.times[t])
        cells = [first]
        for i in range(panel.n_series):
            cells.append("" if panel.mask[i, t] else _fmt(panel.values[i, t]))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def read_panel_csv(path: str | Path) -> PathPanel:
    text = Path(path).read_text().splitlines()
    if not text:
        raise DataError(f"{path}: empty file")
    header = text[0].split(",")
    use_dates = header[0].strip().lower() == "date"
    names = [h.strip() for h in header[1:]]
    n_series = len(names)
    dates: list[str] = []
    times: list[float] = []
    rows: list[list[float]] = []
    mask: list[list[bool]] = []
    for lineno, line in enumerate(text[1:], 2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != n_series + 1:
            raise DataError(f"{path}:{lineno}: expected {n_series + 1} columns, got {len(cells)}")
        if use_dates:
            dates.append(cells[0].strip())
            times.append(float(len(times)) / ANNUALIZATION)
        else:
            times.append(float(cells[0]))
        vals, miss = [], []
        for cell in cells[1:]:
            cell = cell.strip()
            if cell == "":
                vals.append(np.nan)
                miss.append(True)
            else:
                vals.append(float(cell))
                miss.append(False)
        rows.append(vals)
        mask.append(miss)
    values = np.array(rows).T if rows else np.empty((n_series, 0))
    maskarr = np.array(mask).T if mask else np.empty((n_series, 0), dtype=bool)
    values = np.where(maskarr, 0.0, values)
    return PathPanel(
        times=np.asarray(times),
        values=values,
        mask=maskarr,
        names=names,
        dates=dates if use_dates else None,
        meta={"source": str(path)},
    )


# --- realized-variance ingestion -------------------------------------------


def ingest_rv(
    path: str | Path,
    symbols: Optional[Sequence[str]] = None,
    date_range: Optional[tuple[str, str]] = None,
) -> PathPanel:
    """Wide realized-variance CSV -> annualized percent log-volatility panel.

    Each observation maps to log(100 sqrt(RV * 252)): annualize the daily
    variance, convert to percent volatility, take logs.  Zero-RV rows become
    missing (their count is kept per series in meta['zeros']); negative RV is
    a data error naming the offending row.  Series are aligned on the union
    of dates present in the file.
    """
    raw = read_panel_csv(path)
    if raw.dates is None:
        raise DataError(f"{path}: realized-variance input needs a 'date' first column")
    names = raw.names or []
    if symbols is not None:
        missing = [s for s in symbols if s not in names]
        if missing:
            raise DataError(f"symbols not present in {path}: {', '.join(missing)}")
        if len(list(symbols)) == 0:
            raise DataError("empty symbol selection")
        sel = [names.index(s) for s in symbols]
    else:
        sel = list(range(len(names)))
        symbols = names
    keep = np.ones(len(raw.dates), dtype=bool)
    if date_range is not None:
        lo, hi = date_range
        keep = np.array([(lo <= d <= hi) for d in raw.dates])
        if not keep.any():
            raise DataError(f"no rows inside date range {lo}..{hi}")
    dates = [d for d, k in zip(raw.dates, keep) if k]
    rv = raw.values[sel][:, keep]
    mask = raw.mask[sel][:, keep]
    zeros = np.zeros(len(sel), dtype=int)
    values = np.zeros_like(rv)
    for i, sym in enumerate(symbols):
        neg = (~mask[i]) & (rv[i] < 0.0)
        if neg.any():
            row = int(np.nonzero(neg)[0][0])
            raise DataError(f"negative realized variance for {sym} on {dates[row]}")
        zero = (~mask[i]) & (rv[i] == 0.0)
        zeros[i] = int(zero.sum())
        mask[i] = mask[i] | zero
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.log(100.0 * np.sqrt(rv[i] * ANNUALIZATION))
        values[i] = np.where(mask[i], 0.0, vals)
    return PathPanel(
        times=np.arange(len(dates)) / ANNUALIZATION,
        values=values,
        mask=mask,
        names=list(symbols),
        dates=dates,
        meta={
            "source": str(path),
            "zeros": {s: int(z) for s, z in zip(symbols, zeros)},
            "missing_runs": {s: missing_runs(mask[i]) for i, s in enumerate(symbols)},
        },
    )


def missing_runs(mask: np.ndarray) -> dict[str, int]:
    """Run statistics of a missing mask: counts plus leading/trailing/longest runs."""
    mask = np.asarray(mask, dtype=bool)
    n = mask.size
    if n == 0:
        return {"missing": 0, "runs": 0, "longest": 0, "leading": 0, "trailing": 0}
    padded = np.concatenate([[False], mask, [False]])
    starts = np.nonzero(padded[1:] & ~padded[:-1])[0]
    ends = np.nonzero(~padded[1:] & padded[:-1])[0]
    lengths = ends - starts
    return {
        "missing": int(mask.sum()),
        "runs": int(len(lengths)),
        "longest": int(lengths.max()) if len(lengths) else 0,
        "leading": int(lengths[0]) if len(starts) and starts[0] == 0 else 0,
        "trailing": int(lengths[-1]) if len(ends) and ends[-1] == n else 0,
    }


def summarize_panel(panel: PathPanel) -> list[dict]:
    """Per-series (missing, zeros, mean, sd, min, median, max) over observed values."""
    names = panel.names or [f"y{i + 1}" for i in range(panel.n_series)]
    zeros = panel.meta.get("zeros", {})
    out = []
    for i, name in enumerate(names):
        obs = panel.values[i][~panel.mask[i]]
        if obs.size == 0:
            raise DataError(f"series {name} has no observed values")
        out.append(
            {
                "symbol": name,
                "missing": int(panel.mask[i].sum()),
                "zeros": int(zeros.get(name, 0)),
                "mean": float(obs.mean()),
                "sd": float(obs.std(ddof=1)) if obs.size > 1 else 0.0,
                "min": float(obs.min()),
                "median": float(np.median(obs)),
                "max": float(obs.max()),
            }
        )
    return out


# --- run manifests -----------------------------------------------------------


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


@dataclass
class RunManifest:
    """Everything needed to re-run a command and get identical artifacts."""

    command: str
    config: dict[str, str]
    inputs: dict[str, str]      # path -> sha256
    outputs: dict[str, str]     # path -> sha256
    seeds: dict[str, str]
    extra: dict[str, str]
    started: float
    elapsed: float

    def to_keyvalues(self) -> dict[str, str]:
        doc = {
            "manifest.command": self.command,
            "manifest.config_hash": hashlib.sha256(
                "\n".join(f"{k}={v}" for k, v in sorted(self.config.items())).encode()
            ).hexdigest(),
            "manifest.started_unix": _fmt(self.started),
            "manifest.elapsed_seconds": _fmt(self.elapsed),
            "manifest.version": _package_version(),
        }
        doc.update({f"config.{k}": v for k, v in self.config.items()})
        doc.update({f"input.{Path(p).name}": h for p, h in self.inputs.items()})
        doc.update({f"output.{Path(p).name}": h for p, h in self.outputs.items()})
        doc.update({f"seed.{k}": v for k, v in self.seeds.items()})
        doc.update({f"run.{k}": v for k, v in self.extra.items()})
        return doc

    def write(self, path: str | Path) -> None:
        write_keyvalues(path, self.to_keyvalues())


def _package_version() -> str:
    try:
        from importlib.metadata import version

        return version("mfou")
    except Exception:
        return "unknown"


def write_csv(path: str | Path, header: Iterable[str], rows: Iterable[Iterable]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else _fmt(cell) for cell in row))
    Path(path).write_text("\n".join(lines) + "\n")
