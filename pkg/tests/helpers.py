"""Shared test utilities: finite differences and brute-force oracles."""

import numpy as np

from mmcbt import RatingMatrix


def random_rating_matrix(rng, n_users, n_items, density=0.5, scale=5):
    """Random sparse rating matrix with at least one entry."""
    mask = rng.random((n_users, n_items)) < density
    if not mask.any():
        mask[rng.integers(n_users), rng.integers(n_items)] = True
    dense = np.where(mask, rng.integers(1, scale + 1, size=(n_users, n_items)), 0)
    return RatingMatrix.from_dense(dense, scale=scale)


def fd_gradient(objective, arr, delta=1e-6):
    """Central finite differences of a scalar function w.r.t. one array.

    Mutates entries of `arr` in place during probing and restores them, so
    `objective` must read the same array object.
    """
    flat = arr.ravel()
    grad = np.zeros(flat.size)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + delta
        f_plus = objective()
        flat[i] = orig - delta
        f_minus = objective()
        flat[i] = orig
        grad[i] = (f_plus - f_minus) / (2 * delta)
    return grad.reshape(arr.shape)


def max_rel_error(analytic, numeric, safe_mask=None, floor=1e-6):
    """Worst relative disagreement; coordinates where both are tiny pass."""
    analytic = np.asarray(analytic, dtype=float).ravel()
    numeric = np.asarray(numeric, dtype=float).ravel()
    mask = np.ones(analytic.size, dtype=bool) if safe_mask is None \
        else np.asarray(safe_mask, dtype=bool).ravel()
    worst = 0.0
    for a, n, ok in zip(analytic, numeric, mask):
        if not ok:
            continue
        denom = max(abs(a), abs(n))
        if denom < floor:
            continue
        worst = max(worst, abs(a - n) / denom)
    return worst


def away_from(values, kinks, margin=1e-3):
    """True where every value keeps `margin` distance from every kink."""
    values = np.asarray(values, dtype=float)
    ok = np.ones(values.shape, dtype=bool)
    for kink in kinks:
        ok &= np.abs(values - kink) > margin
    return ok


def brute_force_cocluster(Y, k1, k2):
    """Exact minimum block squared error over all assignment pairs."""
    m, n = Y.shape
    best = np.inf
    row_assigns = _all_assignments(m, k1)
    col_assigns = _all_assignments(n, k2)
    sq_total = (Y * Y).sum()
    for ua in row_assigns:
        f1 = np.zeros((m, k1))
        f1[np.arange(m), ua] = 1.0
        cu = np.bincount(ua, minlength=k1).astype(float)
        yf1 = f1.T @ Y  # (k1, n)
        for ia in col_assigns:
            f2 = np.zeros((n, k2))
            f2[np.arange(n), ia] = 1.0
            counts = np.outer(cu, np.bincount(ia, minlength=k2))
            sums = yf1 @ f2
            with np.errstate(invalid="ignore"):
                means = np.where(counts > 0, sums / np.where(counts > 0, counts, 1), 0.0)
            loss = sq_total - (counts * means * means).sum()
            if loss < best:
                best = loss
    return float(best)


def _all_assignments(n, k):
    out = []
    for code in range(k ** n):
        assign = np.empty(n, dtype=np.int64)
        c = code
        for pos in range(n):
            assign[pos] = c % k
            c //= k
        out.append(assign)
    return out
