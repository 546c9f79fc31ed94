"""Prediction accuracy metrics over held-out ratings."""

from __future__ import annotations

import numpy as np


def rmse(truth, pred) -> float:
    """Root mean square error between true and predicted ratings."""
    truth = np.asarray(truth, dtype=float)
    pred = np.asarray(pred, dtype=float)
    if truth.size == 0:
        raise ValueError("rmse of empty lists is undefined")
    if truth.shape != pred.shape:
        raise ValueError("truth and prediction lengths differ")
    return float(np.sqrt(np.mean((truth - pred) ** 2)))


def mae(truth, pred) -> float:
    """Mean absolute error between true and predicted ratings."""
    truth = np.asarray(truth, dtype=float)
    pred = np.asarray(pred, dtype=float)
    if truth.size == 0:
        raise ValueError("mae of empty lists is undefined")
    if truth.shape != pred.shape:
        raise ValueError("truth and prediction lengths differ")
    return float(np.mean(np.abs(truth - pred)))
