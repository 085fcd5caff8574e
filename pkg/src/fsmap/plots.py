"""Figure rendering for the report path (Agg backend, files only)."""
from __future__ import annotations

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_timeseries(diagnostics: dict, path: str, title: str = ""):
    """2x2 diagnostic panel: Besov norm, mass, energy, sphere drift vs t."""
    t = diagnostics["t"]
    fig, axes = plt.subplots(2, 2, figsize=(9, 6), sharex=True)
    panels = (("besov_sigma", "Besov norm"), ("l2", "L2 norm"),
              ("energy_s", "energy E_s"), ("sphere_drift", "sphere drift"))
    for ax, (key, label) in zip(axes.flat, panels):
        ax.plot(t, diagnostics[key], lw=1.2)
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    for ax in axes[1]:
        ax.set_xlabel("t")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_contraction(d_by_label: dict, path: str):
    """Semilog decay of the Picard iterate gaps, one curve per amplitude."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, d in d_by_label.items():
        ax.semilogy(range(len(d)), d, "o-", label=label)
    ax.set_xlabel("iteration m")
    ax.set_ylabel("iterate gap d_m")
    ax.grid(alpha=0.3, which="both")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report_figures(report, outdir: str) -> list:
    """Write PNGs for every stored time series plus experiment-specific
    figures; returns the written paths."""
    written = []
    for name, diag in report.series.items():
        safe = name.replace("/", "_").replace(" ", "_")
        path = os.path.join(outdir, f"{report.experiment}_{safe}.png")
        plot_timeseries(diag, path, title=f"{report.experiment}: {name}")
        written.append(path)

    decay = {}
    for key, val in report.metrics.items():
        if key.startswith("picard_d"):
            tag, eps = key.split("_eps")
            m = int(tag[len("picard_d"):])
            decay.setdefault(f"eps={eps}", {})[m] = val
    if decay:
        curves = {label: [vals[m] for m in sorted(vals)]
                  for label, vals in decay.items()}
        path = os.path.join(outdir, f"{report.experiment}_contraction.png")
        plot_contraction(curves, path)
        written.append(path)
    return written
