"""Codebook-transfer baseline: hard assignment of target rows and columns.

Target users and items are greedily mapped onto codebook clusters by
alternating reassignment under the squared reconstruction error on observed
cells only. Predictions expand the codebook through those assignments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coclustering import Codebook
from .errors import DataError
from .ratings import RatingMatrix


@dataclass(frozen=True)
class CbtModel:
    """Hard cluster assignments for the target's users and items."""

    user_assign: np.ndarray
    item_assign: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "user_assign",
                           np.asarray(self.user_assign, dtype=np.int64))
        object.__setattr__(self, "item_assign",
                           np.asarray(self.item_assign, dtype=np.int64))


def _codebook_values(codebook) -> np.ndarray:
    values = getattr(codebook, "values", codebook)
    return np.asarray(values, dtype=float)


def cbt_loss(obs: RatingMatrix, model: CbtModel, codebook) -> float:
    """Squared error between observed ratings and their assigned cells."""
    c = _codebook_values(codebook)
    pred = c[model.user_assign[obs.users], model.item_assign[obs.items]]
    diff = obs.ratings - pred
    return float(diff @ diff)


def _entry_costs(values, other_per_entry, rows_per_entry, ratings, k, n_rows):
    """costs[r, k] = sum over row r's entries of (x - values[k, other])^2."""
    cols = values[:, other_per_entry]  # (k, n_entries)
    d = (ratings[None, :] - cols) ** 2
    costs = np.zeros((n_rows, k))
    np.add.at(costs, rows_per_entry, d.T)
    return costs


def alternate_cbt(obs: RatingMatrix, codebook, seed=0, max_iters: int = 100):
    """One alternating run from random item assignments.

    Users with no observed ratings stay in cluster 0; ties break to the
    lowest cluster index. Returns (user_assign, item_assign, loss_history)
    with the loss recorded after every half-step.
    """
    c = _codebook_values(codebook)
    k1, k2 = c.shape
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    ia = rng.integers(0, k2, size=obs.n_items)
    ua = np.zeros(obs.n_users, dtype=np.int64)

    has_user = np.bincount(obs.users, minlength=obs.n_users) > 0
    has_item = np.bincount(obs.items, minlength=obs.n_items) > 0
    ratings = obs.ratings.astype(float)

    history = [cbt_loss(obs, CbtModel(ua, ia), c)]
    for _ in range(max_iters):
        costs = _entry_costs(c, ia[obs.items], obs.users, ratings,
                             k1, obs.n_users)
        new_ua = np.where(has_user, np.argmin(costs, axis=1), 0)
        user_changed = bool((new_ua != ua).any())
        ua = new_ua
        history.append(cbt_loss(obs, CbtModel(ua, ia), c))

        costs = _entry_costs(c.T, ua[obs.users], obs.items, ratings,
                             k2, obs.n_items)
        new_ia = np.where(has_item, np.argmin(costs, axis=1), 0)
        item_changed = bool((new_ia != ia).any())
        ia = new_ia
        history.append(cbt_loss(obs, CbtModel(ua, ia), c))

        if not (user_changed or item_changed):
            break
    return ua, ia, history


def cbt_fit(obs: RatingMatrix, codebook, max_iters: int = 100, seed: int = 0,
            restarts: int = 10) -> CbtModel:
    """Best-of-restarts alternating assignment against a fixed codebook."""
    if obs.n_entries < 1:
        raise DataError("cbt_fit needs at least one observed entry")
    c = _codebook_values(codebook)
    if c.ndim != 2 or c.size == 0:
        raise ValueError("codebook must be a non-empty 2-d matrix")
    best = None
    best_loss = np.inf
    for idx in range(restarts):
        rng = np.random.default_rng([seed, idx])
        ua, ia, history = alternate_cbt(obs, c, rng, max_iters)
        if history[-1] < best_loss:
            best_loss = history[-1]
            best = (ua, ia)
    return CbtModel(best[0], best[1])


def round_ratings(matrix: np.ndarray, scale: int = 5) -> np.ndarray:
    """Round to the nearest integer rating in [1, scale]; halves round up."""
    return np.clip(np.floor(np.asarray(matrix, dtype=float) + 0.5),
                   1, scale).astype(np.int64)


def cbt_predict(target: RatingMatrix, model: CbtModel, codebook,
                rounded: bool = False) -> np.ndarray:
    """Fill missing target cells with their assigned codebook values.

    Observed cells keep their original ratings. By default the fill values
    are the raw codebook means; with rounded=True everything is rounded to
    integer ratings for rating-valued export.
    """
    c = _codebook_values(codebook)
    if model.user_assign.size != target.n_users \
            or model.item_assign.size != target.n_items:
        raise ValueError("assignment lengths do not match the target")
    pred = c[model.user_assign][:, model.item_assign]
    pred[target.users, target.items] = target.ratings
    if rounded:
        return round_ratings(pred, target.scale)
    return pred
