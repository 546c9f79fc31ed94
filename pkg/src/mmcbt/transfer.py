"""Transfer of codebook latent factors to a sparse target domain.

The target's users and items get real-valued membership-weight rows (alpha
over row clusters, beta over column clusters). Both are learned by gradient
descent on a hinge objective built from the codebook's factors and
thresholds, with soft penalties pulling every row sum toward 1 and every
entry toward non-negativity. Missing target cells are then filled by
threshold-decoding the transferred scores.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DivergenceError
from .mmmf import MmmfModel, decode_scores, ordinal_sign, smooth_hinge, smooth_hinge_grad
from .ratings import RatingMatrix

_MIN_STEP = 1e-15


def _maybe_item(arr):
    return arr.item() if arr.ndim == 0 else arr


def l1_pen(d):
    """Distance of a row sum from its soft target 1: |d - 1|."""
    d = np.asarray(d, dtype=float)
    return _maybe_item(np.abs(d - 1.0))


def l1_pen_grad(d):
    """Subgradient of l1_pen: -1 below 1, +1 above, 0 at the target."""
    d = np.asarray(d, dtype=float)
    return _maybe_item(np.where(d < 1.0, -1.0, np.where(d > 1.0, 1.0, 0.0)))


def l2_pen(d):
    """Negativity penalty: d when d < 0, else 0."""
    d = np.asarray(d, dtype=float)
    return _maybe_item(np.where(d < 0.0, d, 0.0))


def l2_pen_grad(d):
    """Gradient of l2_pen: 1 on the negative side, else 0."""
    d = np.asarray(d, dtype=float)
    return _maybe_item(np.where(d < 0.0, 1.0, 0.0))


@dataclass(frozen=True)
class TransferModel:
    """Membership weights: alpha (users x k1) and beta (items x k2)."""

    alpha: np.ndarray
    beta: np.ndarray
    objectives: np.ndarray | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class TransferConfig:
    lambda1: float = 1.0
    lambda2: float = 1.0
    step_size: float = 0.01
    max_iters: int = 300
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("penalty weights must be >= 0")
        if self.step_size <= 0:
            raise ValueError("step_size must be > 0")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")


def _check_dims(obs: RatingMatrix, alpha, beta, cb: MmmfModel):
    if alpha.shape != (obs.n_users, cb.U.shape[0]):
        raise ValueError("alpha must be n_users x k1")
    if beta.shape != (obs.n_items, cb.V.shape[0]):
        raise ValueError("beta must be n_items x k2")
    if cb.U.shape[1] != cb.V.shape[1]:
        raise ValueError("codebook factor dimensions differ")
    if cb.Theta.shape != (cb.U.shape[0], obs.scale - 1):
        raise ValueError("codebook thresholds must be k1 x (scale - 1)")


def transfer_objective(obs: RatingMatrix, tm: TransferModel, cb: MmmfModel,
                       cfg: TransferConfig) -> float:
    """Hinge loss of the transferred scores plus the soft penalties."""
    _check_dims(obs, tm.alpha, tm.beta, cb)
    return _objective(obs, tm.alpha, tm.beta, cb, cfg.lambda1, cfg.lambda2)


def _objective(obs, alpha, beta, cb, lambda1, lambda2):
    ui, vi, x = obs.users, obs.items, obs.ratings
    a_fac = alpha @ cb.U
    b_fac = beta @ cb.V
    thr = alpha @ cb.Theta
    scores = np.einsum("ij,ij->i", a_fac[ui], b_fac[vi])
    total = lambda1 * (l1_pen(alpha.sum(axis=1)).sum()
                       + l1_pen(beta.sum(axis=1)).sum())
    total += lambda2 * (l2_pen(alpha).sum() + l2_pen(beta).sum())
    for q in range(1, obs.scale):
        t = ordinal_sign(q, x)
        z = t * (thr[ui, q - 1] - scores)
        total += smooth_hinge(z).sum()
    return float(total)


def _gradients(obs, alpha, beta, cb, lambda1, lambda2, ones_contraction=False):
    ui, vi, x = obs.users, obs.items, obs.ratings
    m, n = obs.n_users, obs.n_items
    a_fac = alpha @ cb.U
    b_fac = beta @ cb.V
    thr = alpha @ cb.Theta
    scores = np.einsum("ij,ij->i", a_fac[ui], b_fac[vi])

    g_alpha = lambda1 * l1_pen_grad(alpha.sum(axis=1))[:, None] \
        + lambda2 * l2_pen_grad(alpha)
    g_beta = lambda1 * l1_pen_grad(beta.sum(axis=1))[:, None] \
        + lambda2 * l2_pen_grad(beta)
    u_row_sum = cb.U.sum(axis=0)
    for q in range(1, obs.scale):
        t = ordinal_sign(q, x)
        z = t * (thr[ui, q - 1] - scores)
        g = t * smooth_hinge_grad(z)
        g_per_user = np.bincount(ui, weights=g, minlength=m)
        g_alpha += np.outer(g_per_user, cb.Theta[:, q - 1])
        gb = np.zeros((m, cb.U.shape[1]))
        np.add.at(gb, ui, g[:, None] * b_fac[vi])
        if ones_contraction:
            # Alternate form for comparison only: the score term is
            # contracted with an all-ones cluster vector, so it is constant
            # across alpha's columns. It does NOT match the analytic
            # derivative of the objective.
            g_alpha -= np.outer(gb @ u_row_sum, np.ones(alpha.shape[1]))
        else:
            g_alpha -= gb @ cb.U.T
        ga = np.zeros((n, cb.V.shape[1]))
        np.add.at(ga, vi, g[:, None] * a_fac[ui])
        g_beta -= ga @ cb.V.T
    return g_alpha, g_beta


def grad_alpha(obs: RatingMatrix, tm: TransferModel, cb: MmmfModel,
               cfg: TransferConfig, ones_contraction: bool = False) -> np.ndarray:
    """Gradient of the transfer objective w.r.t. alpha.

    With ones_contraction=True the per-column factor row is replaced by the
    column sum of the factor matrix; this variant disagrees with the
    objective's true derivative and exists only for side-by-side comparison.
    """
    _check_dims(obs, tm.alpha, tm.beta, cb)
    return _gradients(obs, tm.alpha, tm.beta, cb, cfg.lambda1, cfg.lambda2,
                      ones_contraction=ones_contraction)[0]


def grad_beta(obs: RatingMatrix, tm: TransferModel, cb: MmmfModel,
              cfg: TransferConfig) -> np.ndarray:
    """Gradient of the transfer objective w.r.t. beta."""
    _check_dims(obs, tm.alpha, tm.beta, cb)
    return _gradients(obs, tm.alpha, tm.beta, cb, cfg.lambda1, cfg.lambda2)[1]


def fit_transfer(obs: RatingMatrix, cb: MmmfModel, cfg: TransferConfig) -> TransferModel:
    """Learn membership weights by monotone simultaneous gradient descent.

    Both matrices start uniform in [0, 2/k] so row sums begin near 1, and
    both are updated from the same iterate each step. A step that would
    increase the objective is retried with the step size halved. Stops on
    relative improvement below tol or after max_iters.
    """
    if obs.n_entries < 1:
        raise DataError("fit_transfer needs at least one observed entry")
    k1, k2 = cb.U.shape[0], cb.V.shape[0]
    rng = np.random.default_rng(cfg.seed)
    alpha = rng.uniform(0.0, 2.0 / k1, size=(obs.n_users, k1))
    beta = rng.uniform(0.0, 2.0 / k2, size=(obs.n_items, k2))
    _check_dims(obs, alpha, beta, cb)

    current = _objective(obs, alpha, beta, cb, cfg.lambda1, cfg.lambda2)
    if not np.isfinite(current):
        raise DivergenceError("non-finite objective at initialization")
    history = [current]
    step = cfg.step_size
    for _ in range(cfg.max_iters):
        g_alpha, g_beta = _gradients(obs, alpha, beta, cb,
                                     cfg.lambda1, cfg.lambda2)
        if not (np.isfinite(g_alpha).all() and np.isfinite(g_beta).all()):
            raise DivergenceError("non-finite gradient (step size too large)")
        while True:
            cand_a = alpha - step * g_alpha
            cand_b = beta - step * g_beta
            value = _objective(obs, cand_a, cand_b, cb,
                               cfg.lambda1, cfg.lambda2)
            if np.isfinite(value) and value <= current:
                break
            step *= 0.5
            if step < _MIN_STEP:
                break
        if step < _MIN_STEP:
            break
        alpha, beta = cand_a, cand_b
        improvement = current - value
        current = value
        history.append(current)
        step = min(cfg.step_size, step * 2.0)
        if improvement <= cfg.tol * max(1.0, abs(current)):
            break
    return TransferModel(alpha, beta, objectives=np.asarray(history))


def predict_scores(tm: TransferModel, cb: MmmfModel) -> np.ndarray:
    """Raw transferred score matrix (alpha U)(beta V)^T."""
    return (tm.alpha @ cb.U) @ (tm.beta @ cb.V).T


def predict(target: RatingMatrix, tm: TransferModel, cb: MmmfModel) -> np.ndarray:
    """Predicted integer rating matrix for the target domain.

    Observed cells keep their original ratings; every missing cell gets the
    transferred score decoded against that user's mixed threshold row
    (alpha Theta).
    """
    _check_dims(target, tm.alpha, tm.beta, cb)
    pred = decode_scores(predict_scores(tm, cb), tm.alpha @ cb.Theta)
    pred[target.users, target.items] = target.ratings
    return pred
