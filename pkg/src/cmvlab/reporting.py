"""Deterministic report serialization and figure rendering.

Reports are JSON (sorted keys) plus CSV tables with a fixed column
order and 17-significant-digit decimal formatting, so identical
configurations produce byte-identical files.  Wall-clock timings go to a
separate sidecar file that is excluded from the determinism contract.
Figures are rendered next to each delimited table.
"""

import json
import os
from dataclasses import asdict, is_dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

SCHEMA_VERSION = 1

TABLE_COLUMNS = ("pair_k", "pair_l", "distance", "estimate", "std_error",
                 "n_samples")


def fmt(x):
    """Fixed 17-significant-digit decimal rendering."""
    if isinstance(x, str):
        return x
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    return format(float(x), ".17g")


def _jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def write_report(path, config_echo, results):
    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": _jsonable(config_echo),
        "results": _jsonable(results),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return payload


def write_timings(path, timings):
    with open(path, "w") as fh:
        json.dump(_jsonable(timings), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_table(path, rows):
    """Fixed-schema estimate table: one row per (pair, estimate)."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(TABLE_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(fmt(row[c]) for c in TABLE_COLUMNS) + "\n")


def write_generic_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(row[c]) for c in columns) + "\n")


def estimate_rows(rows, value_key, se_key):
    """Project experiment rows onto the fixed table schema."""
    return [{
        "pair_k": r["pair_k"], "pair_l": r["pair_l"],
        "distance": r["distance"], "estimate": r[value_key],
        "std_error": r[se_key], "n_samples": r["n_samples"],
    } for r in rows]


def render_decay_figure(path, series, fits=None, title=None):
    """Semilog decay plot; `series` maps label -> (d, value, std_error)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, (d, v, se) in series.items():
        ax.errorbar(d, v, yerr=se, marker="o", ms=4, lw=1, capsize=2,
                    label=label)
    if fits:
        for label, fit in fits.items():
            if fit is None:
                continue
            lo, hi = fit.fit_range
            import numpy as np
            dd = np.linspace(lo, hi, 50)
            ax.plot(dd, fit.prefactor * np.exp(-fit.rate * dd), "--", lw=1,
                    label=f"{label}: rate {fit.rate:.3f}, R2 {fit.r_squared:.3f}")
    ax.set_yscale("log")
    ax.set_xlabel("|k - l|")
    ax.set_ylabel("estimate")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_margin_figure(path, lhs, rhs, title=None):
    """Scatter of averaged sups against their integral bounds."""
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.scatter(rhs, lhs, s=12)
    lim = max(max(rhs, default=1.0), max(lhs, default=1.0)) * 1.05
    ax.plot([0, lim], [0, lim], "k--", lw=1)
    ax.set_xlabel("integral bound")
    ax.set_ylabel("averaged windowed sup")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_residual_figure(path, results):
    """Residuals of the verification suite against their thresholds."""
    import numpy as np
    names = [r.name for r in results]
    residuals = [max(r.max_residual, 1e-18) for r in results]
    thresholds = [r.threshold for r in results]
    y = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(6.5, 0.45 * len(names) + 1.2))
    ax.barh(y, residuals, color=["tab:green" if r.passed else "tab:red"
                                 for r in results])
    ax.plot(thresholds, y, "k|", ms=14, label="threshold")
    ax.set_yticks(y, names, fontsize=8)
    ax.set_xscale("log")
    ax.set_xlabel("max residual")
    ax.invert_yaxis()
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def ensure_outdir(out):
    os.makedirs(out, exist_ok=True)
    return out
