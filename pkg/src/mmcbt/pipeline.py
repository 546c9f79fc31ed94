"""End-to-end experiment runner, parameter sweeps, and CSV reporting.

The proposed method fills the source matrix, co-clusters it, prunes the
codebook, factorizes the retained cells, and transfers the factors to the
target by hinge-loss descent. The two baselines share the same harness:
single-domain factorization of the target, and direct codebook expansion.
Every run re-splits the target with a per-run seed and evaluates on the
held-out entries only.
"""

from __future__ import annotations

import io
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .baselines import cbt_fit, cbt_predict
from .coclustering import (CoclusterConfig, build_codebook, cocluster,
                           partial_codebook_ratings, prune_codebook)
from .errors import DataError, DivergenceError
from .metrics import mae, rmse
from .mmmf import SolverConfig, decode_scores, mmmf_fit
from .ratings import RatingMatrix, load_ratings, mean_fill_rows, split_train_test
from .transfer import TransferConfig, fit_transfer, predict_scores

METHODS = ("proposed", "mmmf", "cbt")

REPORT_COLUMNS = ("method", "run", "rmse", "mae", "k1", "k2", "th", "eps",
                  "lambda1", "lambda2", "seconds")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs; field names match CLI flags."""

    source: str = ""
    target: str = ""
    method: str = "proposed"
    k1: int = 150
    k2: int = 100
    th: float = 80.0
    eps: float = 0.3
    latent_dim: int = 20
    lam: float = 0.1
    lambda1: float = 1.0
    lambda2: float = 1.0
    step: float = 0.01
    train_fraction: float = 0.8
    seed: int = 0
    runs: int = 5
    restarts: int = 10
    cocluster_iters: int = 100
    mmmf_iters: int = 500
    transfer_iters: int = 300
    tol: float = 1e-6
    max_users: int = 5000
    max_items: int = 3000
    raw_scores: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")


@dataclass(frozen=True)
class ExperimentReport:
    """Per-run and mean metrics for one experiment configuration."""

    config: ExperimentConfig
    rmse_runs: list[float]
    mae_runs: list[float]
    seconds_runs: list[float]

    def __post_init__(self):
        n = self.config.runs
        if not (len(self.rmse_runs) == len(self.mae_runs)
                == len(self.seconds_runs) == n):
            raise ValueError("run metrics do not match the configured run count")

    @property
    def mean_rmse(self) -> float:
        return float(np.mean(self.rmse_runs))

    @property
    def mean_mae(self) -> float:
        return float(np.mean(self.mae_runs))

    @property
    def mean_seconds(self) -> float:
        return float(np.mean(self.seconds_runs))


class _Stage:
    """Re-raises known errors with the pipeline stage name prepended."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, (DataError, DivergenceError,
                                                ValueError)):
            raise type(exc)(f"stage '{self.name}': {exc}") from exc
        return False


def _fit_codebook_factors(source: RatingMatrix, cfg: ExperimentConfig, seed: int):
    """Source-side stages shared by the proposed method and CBT."""
    with _Stage("mean-fill"):
        filled = mean_fill_rows(source)
    with _Stage("cocluster"):
        mem = cocluster(filled, CoclusterConfig(cfg.k1, cfg.k2,
                                                max_iters=cfg.cocluster_iters,
                                                seed=seed,
                                                restarts=cfg.restarts))
    with _Stage("codebook"):
        cb = build_codebook(filled, mem, cfg.k1, cfg.k2)
    return filled, mem, cb


def _run_proposed(source, train, cfg: ExperimentConfig, seed: int):
    filled, mem, cb = _fit_codebook_factors(source, cfg, seed)
    with _Stage("prune"):
        pcb = prune_codebook(cb, filled, mem, cfg.th, cfg.eps)
        obs_cb = partial_codebook_ratings(pcb, scale=source.scale)
        if obs_cb.n_entries == 0:
            raise DataError("pruning removed every codebook cell")
    with _Stage("codebook-mmmf"):
        factors = mmmf_fit(obs_cb, SolverConfig(latent_dim=cfg.latent_dim,
                                                lam=cfg.lam,
                                                step_size=cfg.step,
                                                max_iters=cfg.mmmf_iters,
                                                tol=cfg.tol, seed=seed))
    with _Stage("transfer"):
        tm = fit_transfer(train, factors,
                          TransferConfig(lambda1=cfg.lambda1,
                                         lambda2=cfg.lambda2,
                                         step_size=cfg.step,
                                         max_iters=cfg.transfer_iters,
                                         tol=cfg.tol, seed=seed))
    scores = predict_scores(tm, factors)
    if cfg.raw_scores:
        return scores
    return decode_scores(scores, tm.alpha @ factors.Theta)


def _run_mmmf(train, cfg: ExperimentConfig, seed: int):
    with _Stage("mmmf"):
        model = mmmf_fit(train, SolverConfig(latent_dim=cfg.latent_dim,
                                             lam=cfg.lam,
                                             step_size=cfg.step,
                                             max_iters=cfg.mmmf_iters,
                                             tol=cfg.tol, seed=seed))
    scores = model.U @ model.V.T
    if cfg.raw_scores:
        return scores
    return decode_scores(scores, model.Theta)


def _run_cbt(source, train, cfg: ExperimentConfig, seed: int):
    _, _, cb = _fit_codebook_factors(source, cfg, seed)
    with _Stage("cbt"):
        model = cbt_fit(train, cb, max_iters=cfg.cocluster_iters, seed=seed,
                        restarts=cfg.restarts)
    # Unrounded expansion; metrics for this baseline stay real-valued.
    return cbt_predict(train, model, cb)


def run_experiment(source: RatingMatrix, target: RatingMatrix,
                   cfg: ExperimentConfig) -> ExperimentReport:
    """Run the configured method `runs` times on already-loaded matrices."""
    rmse_runs, mae_runs, seconds_runs = [], [], []
    for run in range(cfg.runs):
        seed = cfg.seed + run
        started = time.perf_counter()
        with _Stage("split"):
            pair = split_train_test(target, cfg.train_fraction, seed)
        if cfg.method == "proposed":
            pred = _run_proposed(source, pair.train, cfg, seed)
        elif cfg.method == "mmmf":
            pred = _run_mmmf(pair.train, cfg, seed)
        else:
            pred = _run_cbt(source, pair.train, cfg, seed)
        test = pair.test
        if test.n_entries == 0:
            raise DataError("empty test split; lower train_fraction")
        predicted = pred[test.users, test.items]
        rmse_runs.append(rmse(test.ratings, predicted))
        mae_runs.append(mae(test.ratings, predicted))
        seconds_runs.append(time.perf_counter() - started)
    return ExperimentReport(cfg, rmse_runs, mae_runs, seconds_runs)


def run_pipeline(cfg: ExperimentConfig) -> ExperimentReport:
    """Load the configured datasets and run the experiment."""
    with _Stage("load-source"):
        source = load_ratings(cfg.source, cfg.max_users, cfg.max_items)
    with _Stage("load-target"):
        target = load_ratings(cfg.target, cfg.max_users, cfg.max_items)
    return run_experiment(source, target, cfg)


SWEEPABLE = ("k1", "k2", "th", "eps")


def sweep(cfg: ExperimentConfig, param: str, values) -> list[ExperimentReport]:
    """One full experiment per value of a swept hyperparameter."""
    if param not in SWEEPABLE:
        raise ValueError(f"unknown sweep parameter {param!r}; "
                         f"choose from {SWEEPABLE}")
    caster = int if param in ("k1", "k2") else float
    return [run_pipeline(replace(cfg, **{param: caster(v)})) for v in values]


def _report_row(report: ExperimentReport, run_label, rmse_v, mae_v, seconds):
    cfg = report.config
    return (f"{cfg.method},{run_label},{rmse_v:.6f},{mae_v:.6f},"
            f"{cfg.k1},{cfg.k2},{cfg.th:g},{cfg.eps:g},"
            f"{cfg.lambda1:g},{cfg.lambda2:g},{seconds:.3f}")


def report_csv(report: ExperimentReport) -> str:
    """Fixed-column CSV with one row per run plus a mean row."""
    lines = [",".join(REPORT_COLUMNS)]
    for run in range(report.config.runs):
        lines.append(_report_row(report, run, report.rmse_runs[run],
                                 report.mae_runs[run],
                                 report.seconds_runs[run]))
    lines.append(_report_row(report, "mean", report.mean_rmse,
                             report.mean_mae, report.mean_seconds))
    return "\n".join(lines) + "\n"


def sweep_csv(param: str, values, reports: list[ExperimentReport],
              labels=None) -> str:
    """One mean-metrics row per swept value, value echoed in its own column."""
    if labels is None:
        labels = [str(v) for v in values]
    lines = ["param,value," + ",".join(REPORT_COLUMNS)]
    for label, report in zip(labels, reports):
        lines.append(f"{param},{label},"
                     + _report_row(report, "mean", report.mean_rmse,
                                   report.mean_mae, report.mean_seconds))
    return "\n".join(lines) + "\n"


def write_text(text: str, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
