"""Figure rendering for experiment reports.

Figures are written next to the delimited report output. The Agg backend is
forced so rendering works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_run_figure(report, path) -> None:
    """Bar chart of per-run RMSE and MAE with the run means overlaid."""
    runs = np.arange(report.config.runs)
    width = 0.38
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(runs - width / 2, report.rmse_runs, width, label="RMSE",
           color="#3b6ea5")
    ax.bar(runs + width / 2, report.mae_runs, width, label="MAE",
           color="#c2703d")
    ax.axhline(report.mean_rmse, color="#3b6ea5", ls="--", lw=1,
               label=f"mean RMSE = {report.mean_rmse:.4f}")
    ax.axhline(report.mean_mae, color="#c2703d", ls="--", lw=1,
               label=f"mean MAE = {report.mean_mae:.4f}")
    ax.set_xticks(runs)
    ax.set_xlabel("run")
    ax.set_ylabel("error")
    ax.set_title(f"{report.config.method}: held-out error per run")
    ax.legend(fontsize=8)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_figure(param, values, reports, path) -> None:
    """Mean RMSE and MAE as a function of the swept hyperparameter."""
    values = [float(v) for v in values]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(values, [r.mean_rmse for r in reports], "o-", color="#3b6ea5",
            label="RMSE")
    ax.plot(values, [r.mean_mae for r in reports], "s-", color="#c2703d",
            label="MAE")
    ax.set_xlabel(param)
    ax.set_ylabel("mean error")
    method = reports[0].config.method if reports else ""
    ax.set_title(f"{method}: impact of {param}")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
