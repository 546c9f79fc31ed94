"""Ordinal max-margin matrix factorization with a smooth hinge loss.

Latent user/item factors and per-user ordinal thresholds are fit by
full-batch gradient descent. Each observed rating contributes one hinge term
per threshold, pushing the score below thresholds at or above the rating and
above thresholds below it. Scores decode back to ratings by counting crossed
thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DivergenceError
from .ratings import RatingMatrix

_MIN_STEP = 1e-15


def _maybe_item(arr):
    return arr.item() if arr.ndim == 0 else arr


def smooth_hinge(f):
    """Smooth hinge: 0 for f >= 1, quadratic on (0, 1), linear below 0."""
    f = np.asarray(f, dtype=float)
    out = np.where(f >= 1.0, 0.0,
                   np.where(f > 0.0, 0.5 * (1.0 - f) ** 2, 0.5 - f))
    return _maybe_item(out)


def smooth_hinge_grad(f):
    """Derivative of the smooth hinge: 0, f - 1, or -1 by branch."""
    f = np.asarray(f, dtype=float)
    out = np.where(f >= 1.0, 0.0, np.where(f > 0.0, f - 1.0, -1.0))
    return _maybe_item(out)


def ordinal_sign(q, rating):
    """+1 where threshold index q is at or above the rating, else -1."""
    out = np.where(np.asarray(q) >= np.asarray(rating), 1.0, -1.0)
    return int(out.item()) if out.ndim == 0 else out


@dataclass(frozen=True)
class MmmfModel:
    """Row factors U, column factors V, per-row thresholds Theta.

    Theta has scale - 1 columns. `objectives` records the descent history of
    the fit that produced the model, when there was one.
    """

    U: np.ndarray
    V: np.ndarray
    Theta: np.ndarray
    objectives: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def scale(self) -> int:
        return self.Theta.shape[1] + 1

    @property
    def latent_dim(self) -> int:
        return self.U.shape[1]


@dataclass(frozen=True)
class SolverConfig:
    latent_dim: int = 20
    lam: float = 0.1
    step_size: float = 0.01
    max_iters: int = 500
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be >= 1")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.step_size <= 0:
            raise ValueError("step_size must be > 0")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")


def _check_dims(obs: RatingMatrix, model: MmmfModel):
    if model.U.shape[0] != obs.n_users or model.V.shape[0] != obs.n_items:
        raise ValueError("factor shapes do not match the rating matrix")
    if model.U.shape[1] != model.V.shape[1]:
        raise ValueError("U and V latent dimensions differ")
    if model.Theta.shape != (obs.n_users, obs.scale - 1):
        raise ValueError("Theta must be n_users x (scale - 1)")


def mmmf_objective(obs: RatingMatrix, model: MmmfModel, lam: float) -> float:
    """Hinge loss over observed entries plus Frobenius regularization."""
    _check_dims(obs, model)
    return _objective(obs, model.U, model.V, model.Theta, lam)


def _objective(obs, U, V, Theta, lam):
    ui, vi, x = obs.users, obs.items, obs.ratings
    scores = np.einsum("ij,ij->i", U[ui], V[vi])
    total = lam * ((U * U).sum() + (V * V).sum())
    for q in range(1, obs.scale):
        t = ordinal_sign(q, x)
        z = t * (Theta[ui, q - 1] - scores)
        total += smooth_hinge(z).sum()
    return float(total)


def _gradients(obs, U, V, Theta, lam):
    ui, vi, x = obs.users, obs.items, obs.ratings
    gU = 2.0 * lam * U
    gV = 2.0 * lam * V
    gT = np.zeros_like(Theta)
    scores = np.einsum("ij,ij->i", U[ui], V[vi])
    for q in range(1, obs.scale):
        t = ordinal_sign(q, x)
        z = t * (Theta[ui, q - 1] - scores)
        g = t * smooth_hinge_grad(z)
        np.add.at(gT[:, q - 1], ui, g)
        np.add.at(gU, ui, -g[:, None] * V[vi])
        np.add.at(gV, vi, -g[:, None] * U[ui])
    return gU, gV, gT


def mmmf_gradients(obs: RatingMatrix, model: MmmfModel, lam: float):
    """Analytic gradient of the objective w.r.t. (U, V, Theta)."""
    _check_dims(obs, model)
    return _gradients(obs, model.U, model.V, model.Theta, lam)


def mmmf_fit(obs: RatingMatrix, cfg: SolverConfig) -> MmmfModel:
    """Fit factors and thresholds by monotone gradient descent.

    U and V start as small seeded uniform noise; thresholds start at
    1, 2, ..., scale - 1 for every row. A step that would increase the
    objective is retried with the step size halved, so the recorded
    objective sequence never increases. Stops when the improvement falls
    below tol (relative, floored at absolute scale 1) or after max_iters.
    """
    if obs.n_entries < 1:
        raise DataError("mmmf_fit needs at least one observed entry")
    rng = np.random.default_rng(cfg.seed)
    U = rng.uniform(-0.01, 0.01, size=(obs.n_users, cfg.latent_dim))
    V = rng.uniform(-0.01, 0.01, size=(obs.n_items, cfg.latent_dim))
    Theta = np.tile(np.arange(1, obs.scale, dtype=float), (obs.n_users, 1))

    current = _objective(obs, U, V, Theta, cfg.lam)
    if not np.isfinite(current):
        raise DivergenceError("non-finite objective at initialization")
    history = [current]
    step = cfg.step_size
    for _ in range(cfg.max_iters):
        gU, gV, gT = _gradients(obs, U, V, Theta, cfg.lam)
        if not (np.isfinite(gU).all() and np.isfinite(gV).all()
                and np.isfinite(gT).all()):
            raise DivergenceError("non-finite gradient (step size too large)")
        while True:
            cand = (U - step * gU, V - step * gV, Theta - step * gT)
            value = _objective(obs, *cand, cfg.lam)
            if np.isfinite(value) and value <= current:
                break
            step *= 0.5
            if step < _MIN_STEP:
                break
        if step < _MIN_STEP:
            break
        U, V, Theta = cand
        improvement = current - value
        current = value
        history.append(current)
        # let the step grow back toward the configured size after halvings
        step = min(cfg.step_size, step * 2.0)
        if improvement <= cfg.tol * max(1.0, abs(current)):
            break
    return MmmfModel(U, V, Theta, objectives=np.asarray(history))


def decode_rating(score: float, thresholds) -> int:
    """Rating decoded as one plus the number of thresholds the score exceeds.

    Thresholds are used in their stored order; no sorting is applied.
    """
    thresholds = np.asarray(thresholds, dtype=float)
    return 1 + int((score > thresholds).sum())


def decode_scores(scores: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Row-wise threshold decoding of a score matrix.

    Args:
        scores: (m, n) real scores.
        thresholds: (m, scale - 1) per-row thresholds.
    """
    scores = np.asarray(scores, dtype=float)
    thresholds = np.asarray(thresholds, dtype=float)
    out = np.ones(scores.shape, dtype=np.int64)
    for q in range(thresholds.shape[1]):
        out += scores > thresholds[:, q][:, None]
    return out


def fill_ratings(obs: RatingMatrix, model: MmmfModel) -> np.ndarray:
    """Predicted integer matrix: observed cells verbatim, rest decoded."""
    _check_dims(obs, model)
    pred = decode_scores(model.U @ model.V.T, model.Theta)
    pred[obs.users, obs.items] = obs.ratings
    return pred
