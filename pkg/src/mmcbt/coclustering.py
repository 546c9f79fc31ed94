"""Alternating hard co-clustering and the cluster-level rating codebook.

Users and items of a dense (filled-in) rating matrix are partitioned into k1
row clusters and k2 column clusters by minimizing the squared error against
the co-cluster means. The matrix of those means is the codebook; pruning it
against a per-cell agreement threshold yields the partial codebook used for
factor extraction.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .ratings import RatingMatrix


@dataclass(frozen=True)
class Memberships:
    """Hard cluster assignments: one cluster per user row and item column."""

    user_assign: np.ndarray
    item_assign: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "user_assign",
                           np.asarray(self.user_assign, dtype=np.int64))
        object.__setattr__(self, "item_assign",
                           np.asarray(self.item_assign, dtype=np.int64))


@dataclass(frozen=True)
class Codebook:
    """Co-cluster mean ratings plus the cell population counts."""

    values: np.ndarray
    counts: np.ndarray

    @property
    def k1(self) -> int:
        return self.values.shape[0]

    @property
    def k2(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class PartialCodebook:
    """Codebook with low-agreement cells zeroed out and masked off."""

    values: np.ndarray
    retained: np.ndarray

    @property
    def n_retained(self) -> int:
        return int(self.retained.sum())


@dataclass(frozen=True)
class CoclusterConfig:
    k1: int
    k2: int
    max_iters: int = 100
    seed: int = 0
    restarts: int = 10


def _one_hot(assign: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros((assign.size, k))
    out[np.arange(assign.size), assign] = 1.0
    return out


def _block_stats(Y, ua, ia, k1, k2):
    """Per-co-cluster value sums and cell counts."""
    f2 = _one_hot(ia, k2)
    sums = _one_hot(ua, k1).T @ (Y @ f2)
    counts = np.outer(np.bincount(ua, minlength=k1),
                      np.bincount(ia, minlength=k2))
    return sums, counts


def _block_means(Y, ua, ia, k1, k2):
    sums, counts = _block_stats(Y, ua, ia, k1, k2)
    fill = Y.mean()  # empty co-clusters fall back to the global mean
    return np.divide(sums, counts, out=np.full((k1, k2), fill),
                     where=counts > 0), counts


def block_loss(Y: np.ndarray, ua, ia, k1: int, k2: int) -> float:
    """Squared reconstruction error of Y against its co-cluster means."""
    means, counts = _block_means(Y, ua, ia, k1, k2)
    # With means equal to the block averages the cross term collapses:
    # sum (y - m)^2 = sum y^2 - sum counts * m^2
    return float((Y * Y).sum() - (counts * means * means).sum())


def alternate_cocluster(Y: np.ndarray, k1: int, k2: int, seed=0,
                        max_iters: int = 100):
    """One run of alternating reassignment from a random initialization.

    Rows are reassigned to the cluster minimizing squared error against the
    current co-cluster means, then columns symmetrically; means are refreshed
    after every half-step. Ties keep the current cluster. Returns
    (user_assign, item_assign, objective_history), with the objective
    recorded after each half-step.

    Args:
        Y: Dense matrix to co-cluster.
        k1: Number of row clusters.
        k2: Number of column clusters.
        seed: Integer seed or a numpy Generator.
        max_iters: Maximum alternating iterations.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    m, n = Y.shape
    ua = rng.integers(0, k1, size=m)
    ia = rng.integers(0, k2, size=n)
    sq_total = float((Y * Y).sum())

    def loss(means, counts):
        return sq_total - float((counts * means * means).sum())

    history = [loss(*_block_means(Y, ua, ia, k1, k2))]
    for _ in range(max_iters):
        changed = False

        means, _ = _block_means(Y, ua, ia, k1, k2)
        ci = np.bincount(ia, minlength=k2).astype(float)
        # cost[i, k] = sum_l (ci_l * M_kl^2 - 2 * M_kl * R_il), R = Y F2
        r_user = Y @ _one_hot(ia, k2)
        costs = -2.0 * r_user @ means.T + (means * means) @ ci
        best = np.argmin(costs, axis=1)
        rows = np.arange(m)
        keep = costs[rows, ua] <= costs[rows, best]
        new_ua = np.where(keep, ua, best)
        changed |= bool((new_ua != ua).any())
        ua = new_ua
        means, counts = _block_means(Y, ua, ia, k1, k2)
        history.append(loss(means, counts))

        cu = np.bincount(ua, minlength=k1).astype(float)
        r_item = Y.T @ _one_hot(ua, k1)
        costs = -2.0 * r_item @ means + cu @ (means * means)
        best = np.argmin(costs, axis=1)
        cols = np.arange(n)
        keep = costs[cols, ia] <= costs[cols, best]
        new_ia = np.where(keep, ia, best)
        changed |= bool((new_ia != ia).any())
        ia = new_ia
        means, counts = _block_means(Y, ua, ia, k1, k2)
        history.append(loss(means, counts))

        if not changed:
            break
    return ua, ia, history


def cocluster(Yp: np.ndarray, cfg: CoclusterConfig) -> Memberships:
    """Best-of-restarts alternating co-clustering of a dense matrix.

    Each restart draws an independent random initialization derived from
    (seed, restart index); the assignment pair with the lowest squared block
    error wins.
    """
    Yp = np.asarray(Yp, dtype=float)
    if Yp.size == 0:
        raise DataError("cannot co-cluster an empty matrix")
    if not np.isfinite(Yp).all():
        raise DataError("co-clustering input must be finite")
    m, n = Yp.shape
    if not 1 <= cfg.k1 <= m:
        raise ValueError(f"k1 must be in [1, {m}]")
    if not 1 <= cfg.k2 <= n:
        raise ValueError(f"k2 must be in [1, {n}]")
    if cfg.restarts < 1:
        raise ValueError("restarts must be >= 1")

    best = None
    best_loss = np.inf
    for idx in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, idx])
        ua, ia, history = alternate_cocluster(Yp, cfg.k1, cfg.k2, rng,
                                              cfg.max_iters)
        if history[-1] < best_loss:
            best_loss = history[-1]
            best = (ua, ia)
    return Memberships(best[0], best[1])


def build_codebook(Yp: np.ndarray, mem: Memberships, k1: int, k2: int) -> Codebook:
    """Mean rating of every co-cluster; empty cells get the global mean."""
    Yp = np.asarray(Yp, dtype=float)
    ua, ia = mem.user_assign, mem.item_assign
    if ua.size != Yp.shape[0] or ia.size != Yp.shape[1]:
        raise ValueError("membership lengths do not match matrix shape")
    if ua.size and (ua.min() < 0 or ua.max() >= k1):
        raise ValueError("user assignment out of range")
    if ia.size and (ia.min() < 0 or ia.max() >= k2):
        raise ValueError("item assignment out of range")
    means, counts = _block_means(Yp, ua, ia, k1, k2)
    return Codebook(means, counts)


def prune_codebook(cb: Codebook, Yp: np.ndarray, mem: Memberships,
                   th: float, eps: float) -> PartialCodebook:
    """Keep only codebook cells whose co-cluster agrees closely enough.

    A cell survives when strictly more than th percent of its co-cluster's
    filled-in values lie within eps of the cell mean. Dropped and empty cells
    are zeroed and unmasked.
    """
    if not 0.0 < th <= 100.0:
        raise ValueError("th must be in (0, 100]")
    if eps < 0.0:
        raise ValueError("eps must be >= 0")
    Yp = np.asarray(Yp, dtype=float)
    ua, ia = mem.user_assign, mem.item_assign
    k1, k2 = cb.values.shape
    within = np.abs(Yp - cb.values[ua][:, ia]) <= eps
    hits = _one_hot(ua, k1).T @ (within.astype(float) @ _one_hot(ia, k2))
    counts = cb.counts
    frac = np.divide(hits, counts, out=np.zeros((k1, k2)), where=counts > 0)
    retained = (counts > 0) & (frac > th / 100.0)
    values = np.where(retained, cb.values, 0.0)
    return PartialCodebook(values, retained)


def partial_codebook_ratings(pcb: PartialCodebook, scale: int = 5) -> RatingMatrix:
    """Retained cells rounded to ordinal ratings (half rounds up).

    Dropped cells become missing entries, so downstream factorization treats
    them like unobserved ratings.
    """
    rounded = np.clip(np.floor(pcb.values + 0.5), 1, scale).astype(np.int64)
    rows, cols = np.nonzero(pcb.retained)
    return RatingMatrix(pcb.values.shape[0], pcb.values.shape[1],
                        rows, cols, rounded[rows, cols], scale=scale)


def save_codebook_csv(cb: Codebook, path) -> None:
    """Write codebook values as plain CSV, one row cluster per line."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for row in cb.values:
            writer.writerow([f"{v:.12g}" for v in row])


def save_partial_codebook_csv(pcb: PartialCodebook, path) -> None:
    """Write partial codebook values as CSV; dropped cells are empty fields."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for vals, kept in zip(pcb.values, pcb.retained):
            writer.writerow([f"{v:.12g}" if k else "" for v, k in zip(vals, kept)])


def load_codebook_csv(path) -> np.ndarray:
    """Read codebook values written by save_codebook_csv."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [[float(c) for c in row] for row in csv.reader(fh) if row]
    if not rows:
        raise DataError(f"{path}: empty codebook CSV")
    return np.asarray(rows)


def load_partial_codebook_csv(path) -> PartialCodebook:
    """Read a partial codebook CSV; empty fields mean dropped cells."""
    values, retained = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            values.append([float(c) if c != "" else 0.0 for c in row])
            retained.append([c != "" for c in row])
    if not values:
        raise DataError(f"{path}: empty codebook CSV")
    return PartialCodebook(np.asarray(values), np.asarray(retained))
