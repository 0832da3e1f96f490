"""Report writers: delimited tables, key-value summaries, rendered figures.

Every estimation command emits a machine-readable CSV next to a human
readable key-value text file; the reproduction harness also renders
matplotlib figures (coefficient comparisons, true-vs-learned curves) to
files alongside the delimited output.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .jump import JumpEstimate, SweepResult

__all__ = [
    "write_keyvalue",
    "write_jump_report",
    "write_coefficient_table",
    "write_sweep_csv",
    "render_coefficient_figure",
    "render_curve_figure",
]


def write_keyvalue(path, entries: dict):
    with open(path, "w") as fh:
        for key, value in entries.items():
            fh.write(f"{key} = {value}\n")


def write_jump_report(prefix, est: JumpEstimate, config: dict | None = None):
    """Write <prefix>.txt (key-value) and <prefix>.csv (one machine row)."""
    prefix = Path(prefix)
    entries = {
        "alpha_hat": f"{est.alpha_hat:.6f}",
        "sigma_hat": f"{est.sigma_hat:.6f}",
        "alpha_per_k": " ".join(f"{a:.6f}" for a in est.alpha_per_k),
        "sigma_per_k": " ".join(f"{s:.6f}" for s in est.sigma_per_k),
        "counts": " ".join(str(c) for c in est.counts),
        "M": est.M,
        "h": est.h,
        "n": est.n,
    }
    if est.flags:
        entries["flags"] = "; ".join(est.flags)
    if config:
        entries.update({f"config.{k}": v for k, v in config.items()})
    write_keyvalue(prefix.with_suffix(".txt"), entries)

    header = ["alpha_hat", "sigma_hat"]
    row = [est.alpha_hat, est.sigma_hat]
    for idx, a in enumerate(est.alpha_per_k, start=1):
        header.append(f"alpha_k{idx}")
        row.append(a)
    for idx, s in enumerate(est.sigma_per_k):
        header.append(f"sigma_k{idx}")
        row.append(s)
    for idx, c in enumerate(est.counts):
        header.append(f"n{idx}")
        row.append(c)
    with open(prefix.with_suffix(".csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerow(row)


def write_coefficient_table(path, basis_names, learned, true=None):
    """CSV with one row per basis entry: name, true value (if known), learned."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if true is None:
            writer.writerow(["basis", "learned"])
            for name, value in zip(basis_names, learned):
                writer.writerow([name, f"{value:.6g}"])
        else:
            writer.writerow(["basis", "true", "learned"])
            for name, t, value in zip(basis_names, true, learned):
                writer.writerow([name, f"{t:.6g}", f"{value:.6g}"])


def write_sweep_csv(path, sweep: SweepResult):
    """alpha(eps, h) grid: one row per epsilon, one column per h."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epsilon"] + [f"h={h:g}" for h in sweep.h_list])
        for i, eps in enumerate(sweep.eps_list):
            row = [f"{eps:g}"]
            for j in range(len(sweep.h_list)):
                value = sweep.alpha[i, j]
                row.append("NA" if not np.isfinite(value) else f"{value:.6f}")
            writer.writerow(row)


def render_coefficient_figure(path, basis_names, learned, true=None, title=""):
    """Grouped bar chart of learned (and true, if known) coefficients."""
    k = len(basis_names)
    fig, ax = plt.subplots(figsize=(max(6, 0.6 * k), 4))
    pos = np.arange(k)
    if true is not None:
        ax.bar(pos - 0.2, true, width=0.4, label="true")
        ax.bar(pos + 0.2, learned, width=0.4, label="learned")
        ax.legend()
    else:
        ax.bar(pos, learned, width=0.6)
    ax.set_xticks(pos)
    ax.set_xticklabels(basis_names, rotation=60, ha="right", fontsize=8)
    ax.set_ylabel("coefficient")
    ax.set_title(title)
    ax.axhline(0.0, color="k", linewidth=0.5)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_curve_figure(path, x, curves, title="", xlabel="x"):
    """Overlay named curves (e.g. true vs learned drift) over a 1-D domain."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, y in curves.items():
        style = "--" if "true" in label else "-"
        ax.plot(x, y, style, label=label)
    ax.set_xlabel(xlabel)
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
