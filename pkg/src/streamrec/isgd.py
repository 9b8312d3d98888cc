"""Incremental SGD matrix factorization for positive-only streams.

Every observed pair is treated as a target of 1.  A single pass over each
incoming ``(user, item)`` moves the two factor rows towards a unit dot
product; recommendation ranks items by how close their predicted score is
to 1.
"""
from __future__ import annotations

import math

import numpy as np

from .core import (
    FactorMatrix,
    Hyperparameters,
    IdIndex,
    InteractionEvent,
    ModelDivergenceError,
    RankedList,
    init_row,
    rank_candidates,
)


def sgd_step(a: np.ndarray, b: np.ndarray, eta: float, lam: float,
             sequential: bool = True) -> None:
    """One in-place SGD pass on a user row ``a`` and item row ``b``.

    The error is computed once per pass.  With ``sequential`` the item
    update sees the already-updated user row.
    """
    err = 1.0 - a.dot(b)
    if sequential:
        a += eta * (err * b - lam * a)
        b += eta * (err * a - lam * b)
    else:
        a_old = a.copy()
        a += eta * (err * b - lam * a)
        b += eta * (err * a_old - lam * b)


class ISGD:
    """Incremental SGD recommender.

    Parameters
    ----------
    hp : Hyperparameters
        Latent size, passes per event, regularization and learn rate.
    seed : int, SeedSequence or Generator, optional
        Source for factor initialization.  Rows are drawn lazily, user row
        before item row, so the stream alone fixes RNG consumption.
    user_index, item_index : IdIndex, optional
        Shared id interning (used by the ensemble).  When shared, an id can
        be interned without this model holding a factor row for it.
    """

    def __init__(self, hp: Hyperparameters | None = None, seed=None,
                 user_index: IdIndex | None = None,
                 item_index: IdIndex | None = None):
        self.hp = hp if hp is not None else Hyperparameters()
        if isinstance(seed, np.random.Generator):
            self.rng = seed
        else:
            self.rng = np.random.default_rng(seed)
        self.user_index = user_index if user_index is not None else IdIndex()
        self.item_index = item_index if item_index is not None else IdIndex()
        self.users = FactorMatrix(self.hp.k)
        self.items = FactorMatrix(self.hp.k)

    def _ensure_rows(self, u: int, i: int) -> None:
        hp = self.hp
        if not self.users.has_row(u):
            init_row(self.users, u, self.rng, hp.init_mean, hp.init_stddev)
        if not self.items.has_row(i):
            init_row(self.items, i, self.rng, hp.init_mean, hp.init_stddev)

    def train_pair(self, u: int, i: int, times: int = 1) -> None:
        """Run ``times * hp.iters`` SGD passes on existing rows ``u`` and ``i``."""
        a = self.users.row(u)
        b = self.items.row(i)
        hp = self.hp
        for _ in range(times * hp.iters):
            sgd_step(a, b, hp.eta, hp.lam, hp.sequential_updates)
        if not math.isfinite(a.sum() + b.sum()):
            raise ModelDivergenceError(
                f"non-finite factors after training user row {u}, item row {i}")

    def update_indices(self, u: int, i: int, times: int = 1) -> None:
        """Lazily create rows for dense indices ``u``/``i`` and train on them."""
        self._ensure_rows(u, i)
        self.train_pair(u, i, times)

    def update(self, event: InteractionEvent) -> None:
        u = self.user_index.intern(event.user)
        i = self.item_index.intern(event.item)
        self.update_indices(u, i)

    def _user_row(self, user: str) -> np.ndarray | None:
        u = self.user_index.get(user)
        if u is None or not self.users.has_row(u):
            return None
        return self.users.row(u)

    def knows_user(self, user: str) -> bool:
        return self._user_row(user) is not None

    def knows_item(self, item: str) -> bool:
        i = self.item_index.get(item)
        return i is not None and self.items.has_row(i)

    def score(self, user: str, item: str) -> float | None:
        a = self._user_row(user)
        i = self.item_index.get(item)
        if a is None or i is None or not self.items.has_row(i):
            return None
        return float(a.dot(self.items.row(i)))

    def score_all(self, user: str) -> np.ndarray:
        """Predicted scores for every interned item (0 where no row exists)."""
        a = self._user_row(user)
        n = len(self.item_index)
        if a is None:
            raise KeyError(f"unknown user {user!r}")
        return self.items.dense(n) @ a

    def candidate_mask(self, exclude=()) -> np.ndarray:
        mask = self.items.present_mask(len(self.item_index)).copy()
        _mask_out(mask, self.item_index, exclude)
        return mask

    def recommend(self, user: str, n: int, exclude=frozenset()) -> RankedList:
        """Top-``n`` known items for ``user`` ordered by ``|1 - score|``.

        Raises ``KeyError`` for an unknown user.
        """
        scores = self.score_all(user)
        cands = np.flatnonzero(self.candidate_mask(exclude))
        top = rank_candidates(scores, cands, n)
        return RankedList([self.item_index.reverse(j) for j in top], scores[top])


def _mask_out(mask: np.ndarray, index: IdIndex, exclude) -> None:
    for item in exclude:
        j = index.get(item)
        if j is not None and j < len(mask):
            mask[j] = False
