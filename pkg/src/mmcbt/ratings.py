"""Sparse ordinal rating matrices: loaders, train/test splitting, row-mean fill.

A rating matrix stores user x item ordinal ratings as (user, item, rating)
triplets. Missing ratings are absent entries; the value 0 never appears as a
rating. Dense matrices throughout the package are plain numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

DEFAULT_SCALE = 5


def _frozen_array(values, dtype):
    arr = np.ascontiguousarray(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RatingMatrix:
    """User x item ordinal ratings in triplet form.

    Attributes:
        n_users: Number of user rows.
        n_items: Number of item columns.
        users: Entry user indices (0-based).
        items: Entry item indices (0-based).
        ratings: Entry rating values, integers in [1, scale].
        scale: Maximum ordinal rating value.
    """

    n_users: int
    n_items: int
    users: np.ndarray
    items: np.ndarray
    ratings: np.ndarray

    scale: int = DEFAULT_SCALE

    def __post_init__(self):
        users = _frozen_array(self.users, np.int64)
        items = _frozen_array(self.items, np.int64)
        ratings = _frozen_array(self.ratings, np.int64)
        object.__setattr__(self, "users", users)
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "ratings", ratings)
        if not (users.ndim == items.ndim == ratings.ndim == 1):
            raise DataError("entry arrays must be one-dimensional")
        if not (users.size == items.size == ratings.size):
            raise DataError("entry arrays must have equal length")
        if self.n_users < 0 or self.n_items < 0:
            raise DataError("matrix dimensions must be non-negative")
        if self.scale < 1:
            raise DataError("rating scale must be at least 1")
        if users.size:
            if users.min() < 0 or users.max() >= self.n_users:
                raise DataError("user index out of range")
            if items.min() < 0 or items.max() >= self.n_items:
                raise DataError("item index out of range")
            if ratings.min() < 1 or ratings.max() > self.scale:
                raise DataError(f"rating outside [1, {self.scale}]")
            keys = users * np.int64(self.n_items) + items
            if np.unique(keys).size != keys.size:
                raise DataError("duplicate (user, item) entry")

    @classmethod
    def from_dense(cls, dense, scale: int = DEFAULT_SCALE) -> "RatingMatrix":
        """Build from a dense array where 0 marks a missing rating."""
        dense = np.asarray(dense)
        users, items = np.nonzero(dense)
        return cls(dense.shape[0], dense.shape[1], users, items,
                   dense[users, items], scale=scale)

    @property
    def n_entries(self) -> int:
        return self.users.size

    def density(self) -> float:
        """Fraction of cells observed."""
        total = self.n_users * self.n_items
        return self.n_entries / total if total else 0.0

    def mask(self) -> np.ndarray:
        """Boolean indicator of observed cells."""
        w = np.zeros((self.n_users, self.n_items), dtype=bool)
        w[self.users, self.items] = True
        return w

    def to_dense(self) -> np.ndarray:
        """Dense float matrix with 0.0 at missing cells."""
        out = np.zeros((self.n_users, self.n_items))
        out[self.users, self.items] = self.ratings
        return out

    def take(self, idx) -> "RatingMatrix":
        """Sub-matrix keeping only the entries at positions `idx`."""
        return RatingMatrix(self.n_users, self.n_items, self.users[idx],
                            self.items[idx], self.ratings[idx], scale=self.scale)


@dataclass(frozen=True)
class SplitPair:
    """A disjoint, covering train/test partition of one rating matrix."""

    train: RatingMatrix
    test: RatingMatrix
    seed: int


def load_movielens(path) -> RatingMatrix:
    """Load a `UserID::MovieID::Rating::Timestamp` ratings file.

    IDs are 1-based in the file and converted to 0-based indices; dimensions
    are the maximum IDs seen. Timestamps are discarded.
    """
    users, items, ratings = [], [], []
    try:
        with open(path, encoding="utf-8-sig") as fh:
            for ln, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line:
                    continue
                fields = line.split("::")
                if len(fields) != 4:
                    raise DataError(
                        f"{path}: line {ln}: expected "
                        "UserID::MovieID::Rating::Timestamp")
                try:
                    uid, iid, rating = (int(fields[0]), int(fields[1]),
                                        int(fields[2]))
                except ValueError:
                    raise DataError(f"{path}: line {ln}: non-integer field") from None
                if uid < 1 or iid < 1:
                    raise DataError(f"{path}: line {ln}: IDs must be >= 1")
                if not 1 <= rating <= DEFAULT_SCALE:
                    raise DataError(
                        f"{path}: line {ln}: rating {rating} outside "
                        f"[1, {DEFAULT_SCALE}]")
                users.append(uid - 1)
                items.append(iid - 1)
                ratings.append(rating)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not ratings:
        raise DataError(f"{path}: no ratings")
    return RatingMatrix(max(users) + 1, max(items) + 1, users, items, ratings)


def load_goodbooks(path, max_users: int = 5000, max_items: int = 3000) -> RatingMatrix:
    """Load a `user_id,book_id,rating` CSV, keeping only IDs within bounds.

    The file must start with a `user_id,book_id,rating` header. Rows whose
    raw 1-based user ID exceeds `max_users` or book ID exceeds `max_items`
    are dropped silently; the returned matrix always has shape
    (max_users, max_items).
    """
    users, items, ratings = [], [], []
    try:
        with open(path, encoding="utf-8-sig") as fh:
            header = fh.readline()
            cols = [c.strip() for c in header.strip().split(",")]
            if cols[:3] != ["user_id", "book_id", "rating"]:
                raise DataError(f"{path}: expected header user_id,book_id,rating")
            for ln, raw in enumerate(fh, 2):
                line = raw.strip()
                if not line:
                    continue
                fields = [f.strip() for f in line.split(",")]
                if len(fields) != 3:
                    raise DataError(f"{path}: line {ln}: expected 3 fields")
                try:
                    uid, iid, rating = int(fields[0]), int(fields[1]), int(fields[2])
                except ValueError:
                    raise DataError(f"{path}: line {ln}: non-integer field") from None
                if uid < 1 or iid < 1:
                    raise DataError(f"{path}: line {ln}: IDs must be >= 1")
                if uid > max_users or iid > max_items:
                    continue
                if not 1 <= rating <= DEFAULT_SCALE:
                    raise DataError(
                        f"{path}: line {ln}: rating {rating} outside "
                        f"[1, {DEFAULT_SCALE}]")
                users.append(uid - 1)
                items.append(iid - 1)
                ratings.append(rating)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not ratings:
        raise DataError(f"{path}: no ratings")
    return RatingMatrix(max_users, max_items, users, items, ratings)


def load_ratings(path, max_users: int = 5000, max_items: int = 3000) -> RatingMatrix:
    """Load either supported ratings format, sniffing by the first line."""
    try:
        with open(path, encoding="utf-8-sig") as fh:
            first = fh.readline()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if "::" in first:
        return load_movielens(path)
    return load_goodbooks(path, max_users=max_users, max_items=max_items)


def split_train_test(m: RatingMatrix, train_fraction: float, seed: int) -> SplitPair:
    """Uniform random entry-level partition into train and test sets.

    The train set gets round(train_fraction * n_entries) entries; the split
    is deterministic for a given seed.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    if m.n_entries < 2:
        raise DataError("need at least 2 entries to split")
    perm = np.random.default_rng(seed).permutation(m.n_entries)
    n_train = int(round(train_fraction * m.n_entries))
    return SplitPair(m.take(perm[:n_train]), m.take(perm[n_train:]), seed)


def mean_fill_rows(m: RatingMatrix) -> np.ndarray:
    """Dense copy with each missing cell set to its row's observed mean.

    Rows with no observed ratings fall back to the global observed mean, so
    every output value stays inside [1, scale].
    """
    if m.n_entries == 0:
        raise DataError("mean fill needs at least one observed rating")
    sums = np.bincount(m.users, weights=m.ratings.astype(float),
                       minlength=m.n_users)
    counts = np.bincount(m.users, minlength=m.n_users)
    global_mean = m.ratings.mean()
    row_means = np.divide(sums, counts, out=np.full(m.n_users, global_mean),
                          where=counts > 0)
    out = np.repeat(row_means[:, None], m.n_items, axis=1)
    out[m.users, m.items] = m.ratings
    return out


def save_triplets(matrix: np.ndarray, path) -> None:
    """Write a dense matrix as `user,item,rating` CSV rows (0-based indices)."""
    matrix = np.asarray(matrix)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("user,item,rating\n")
        for i in range(matrix.shape[0]):
            for j in range(matrix.shape[1]):
                fh.write(f"{i},{j},{matrix[i, j]:g}\n")
