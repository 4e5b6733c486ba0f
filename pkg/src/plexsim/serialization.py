"""CSV/JSON serialization of results and static SVG plots."""
from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .observables import CorrelationResult, PhotonStatistics
from .scenarios import SweepResult
from .spectra import LevelDiagram, SpectrumResult

SWEEP_COLUMNS = ("omega_eV", "param1", "param2", "g2", "g3", "mean_n", "regime", "engine", "error_code")
SIG_DIGITS = 12


def fmt(x) -> str:
    """Number as text with 12 significant digits; empty for missing values."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.{SIG_DIGITS}g}"


def _round(obj):
    """Recursively round floats to 12 significant digits for JSON output."""
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if not math.isfinite(x) else float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_round(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def stats_to_dict(stats: PhotonStatistics) -> dict:
    return {"probabilities": stats.probabilities, "mean_n": stats.mean_n, "deltas": stats.deltas}


def to_jsonable(result, engine: str = "master-equation") -> dict:
    if isinstance(result, SweepResult):
        return _round(result.to_dict())
    if isinstance(result, CorrelationResult):
        return _round({**result.to_dict(), "engine": engine})
    if isinstance(result, LevelDiagram):
        return _round({"manifolds": result.to_dict(), "frame": "lab", "unit": "eV"})
    if isinstance(result, SpectrumResult):
        return _round(result.to_dict())
    if isinstance(result, PhotonStatistics):
        return _round(stats_to_dict(result))
    if isinstance(result, dict):
        return _round(result)
    raise TypeError(f"cannot serialize {type(result).__name__}")


def _sweep_rows(result: SweepResult) -> list[list[str]]:
    rows = []
    for rec in result.records:
        r = rec.result
        rows.append([
            fmt(rec.omega), fmt(rec.param1), fmt(rec.param2),
            fmt(r.g2 if r else None), fmt(r.g3 if r else None), fmt(r.mean_n if r else None),
            r.regime.value if r else "", result.engine.value, rec.error_code,
        ])
    return rows


def to_csv(result, engine: str = "master-equation") -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(result, SweepResult):
        w.writerow(SWEEP_COLUMNS)
        w.writerows(_sweep_rows(result))
    elif isinstance(result, CorrelationResult):
        w.writerow(SWEEP_COLUMNS)
        w.writerow([fmt(result.drive_omega), "", "", fmt(result.g2), fmt(result.g3), fmt(result.mean_n),
                    result.regime.value, engine, ""])
    elif isinstance(result, LevelDiagram):
        w.writerow(("manifold", "index", "energy_eV"))
        for n, levels in result.manifolds.items():
            for i, e in enumerate(levels):
                w.writerow((n, i, fmt(e)))
    elif isinstance(result, SpectrumResult):
        w.writerow(("omega_eV", "response"))
        for om, s in zip(result.omegas, result.response):
            w.writerow((fmt(om), fmt(s)))
    elif isinstance(result, PhotonStatistics):
        w.writerow(("m", "probability", "delta"))
        for m, p in enumerate(result.probabilities):
            d = result.deltas[m] if m < len(result.deltas) else None
            w.writerow((m, fmt(p), fmt(d)))
    else:
        raise TypeError(f"cannot serialize {type(result).__name__} as CSV")
    return buf.getvalue()


def write_results(result, format: str, path, engine: str = "master-equation") -> None:
    """Write ``result`` to ``path`` as ``csv`` or ``json``."""
    if format == "csv":
        text = to_csv(result, engine)
    elif format == "json":
        text = json.dumps(to_jsonable(result, engine), indent=2) + "\n"
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
    Path(path).write_text(text, encoding="utf-8")


def read_sweep_csv(path) -> list[dict]:
    """Rows of a sweep CSV with numeric columns converted to float (None when empty)."""
    numeric = {"omega_eV", "param1", "param2", "g2", "g3", "mean_n"}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SWEEP_COLUMNS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        rows = []
        for row in reader:
            rows.append({k: (float(v) if v else None) if k in numeric else v for k, v in row.items()})
    return rows


# --- plots ------------------------------------------------------------------

def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


_REGIME_CODES = {"PB": 0, "UPB": 1, "bunching": 2, "coherent": 3}


def plot_sweep(result: SweepResult, path) -> None:
    """g2/g3 lines for 1D sweeps, regime heatmap for 2D sweeps."""
    plt = _figure()
    fig, ax = plt.subplots(figsize=(6, 4))
    if result.axis2 is None:
        x = np.array(result.axis1.grid)
        ax.semilogy(x, result.values("g2"), label="g2(0)")
        ax.semilogy(x, result.values("g3"), label="g3(0)")
        ax.axhline(1.0, color="0.5", lw=0.8, ls="--")
        ax.set_xlabel(result.axis1.path)
        ax.set_ylabel("correlation")
        ax.legend()
    else:
        codes = np.array([_REGIME_CODES[r.value] if r is not None else np.nan for r in result.regimes()],
                         dtype=float).reshape(result.shape)
        from matplotlib.colors import ListedColormap

        cmap = ListedColormap(["tab:blue", "tab:red", "0.3", "white"])
        x2, x1 = np.array(result.axis2.grid), np.array(result.axis1.grid)
        mesh = ax.pcolormesh(x2, x1, codes, cmap=cmap, vmin=-0.5, vmax=3.5, shading="nearest")
        cbar = fig.colorbar(mesh, ax=ax, ticks=list(_REGIME_CODES.values()))
        cbar.ax.set_yticklabels(list(_REGIME_CODES))
        ax.set_xlabel(result.axis2.path)
        ax.set_ylabel(result.axis1.path)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_spectrum(result: SpectrumResult, path, levels: LevelDiagram | None = None) -> None:
    plt = _figure()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(result.omegas, result.response)
    if levels is not None and 1 in levels.manifolds:
        for e in levels.manifolds[1]:
            ax.axvline(e, color="0.5", lw=0.8, ls=":")
    ax.set_xlabel("drive energy (eV)")
    ax.set_ylabel("kappa <n> / E_l^2")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_levels(levels: LevelDiagram, path) -> None:
    plt = _figure()
    fig, ax = plt.subplots(figsize=(4, 5))
    for n, values in levels.manifolds.items():
        for e in values:
            ax.hlines(e, n - 0.3, n + 0.3)
    ax.set_xticks(list(levels.manifolds))
    ax.set_xlabel("excitation number")
    ax.set_ylabel("energy (eV)")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
