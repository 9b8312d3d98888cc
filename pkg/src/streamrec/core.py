"""Shared types for the streaming recommenders.

Everything here is single-writer: readers may run concurrently as long as no
update is in flight on the same object.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Protocol, runtime_checkable

import numpy as np


class ModelDivergenceError(FloatingPointError):
    """A factor became non-finite during training."""

    def __init__(self, message: str, node: int | None = None):
        if node is not None:
            message = f"node {node}: {message}"
        super().__init__(message)
        self.node = node


@dataclass(frozen=True)
class InteractionEvent:
    """One positive (user, item) observation from a chronological stream.

    ``timestamp`` is carried verbatim and only used to check ordering.
    """

    user: str
    item: str
    rating: float | None = None
    timestamp: str | None = None

    def __post_init__(self):
        if not self.user or not self.item:
            raise ValueError("user and item identifiers must be non-empty")


@dataclass(frozen=True)
class Hyperparameters:
    k: int = 8
    iters: int = 1
    lam: float = 0.01
    eta: float = 0.05
    init_mean: float = 0.0
    init_stddev: float = 0.1
    # False: update B_i from the pre-step A_u instead of the freshly updated one
    sequential_updates: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.iters < 1:
            raise ValueError(f"iters must be >= 1, got {self.iters}")
        if not self.eta > 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if not self.lam >= 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if not self.init_stddev >= 0:
            raise ValueError(f"init_stddev must be >= 0, got {self.init_stddev}")


class IdIndex:
    """Bijection between external string ids and dense 0-based indices.

    Indices are handed out in first-seen order and never recycled.
    """

    __slots__ = ("_forward", "_reverse")

    def __init__(self, ids=()):
        self._forward: dict[str, int] = {}
        self._reverse: list[str] = []
        for x in ids:
            self.intern(x)

    def intern(self, id_: str) -> int:
        idx = self._forward.get(id_)
        if idx is None:
            idx = len(self._reverse)
            self._forward[id_] = idx
            self._reverse.append(id_)
        return idx

    def get(self, id_: str) -> int | None:
        return self._forward.get(id_)

    def reverse(self, idx: int) -> str:
        return self._reverse[idx]

    def ids(self) -> list[str]:
        return list(self._reverse)

    def __contains__(self, id_) -> bool:
        return id_ in self._forward

    def __len__(self) -> int:
        return len(self._reverse)

    def __iter__(self) -> Iterator[str]:
        return iter(self._reverse)


class FactorMatrix:
    """Grow-on-demand latent factor rows keyed by dense index.

    Storage is one contiguous ``(capacity, k)`` array; rows that were never
    initialized stay all-zero and are flagged absent in ``present``.  The
    zero fill matters: a dot product against an absent row is exactly 0.
    """

    def __init__(self, k: int, capacity: int = 64):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        self.k = k
        self._data = np.zeros((max(capacity, 1), k))
        self._present = np.zeros(max(capacity, 1), dtype=bool)
        self._n_rows = 0
        # one past the highest index ever touched
        self._extent = 0

    def _grow(self, idx: int):
        cap = self._data.shape[0]
        if idx < cap:
            return
        new_cap = max(cap * 2, idx + 1)
        data = np.zeros((new_cap, self.k))
        data[:cap] = self._data
        present = np.zeros(new_cap, dtype=bool)
        present[:cap] = self._present
        self._data = data
        self._present = present

    def has_row(self, idx: int) -> bool:
        return 0 <= idx < self._extent and bool(self._present[idx])

    def row(self, idx: int) -> np.ndarray:
        """Return a writable view of row ``idx``; raises ``KeyError`` if absent."""
        if not self.has_row(idx):
            raise KeyError(f"no factor row at index {idx}")
        return self._data[idx]

    def set_row(self, idx: int, values) -> None:
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (self.k,):
            raise ValueError(f"row must have shape ({self.k},), got {values.shape}")
        self._grow(idx)
        if not self._present[idx]:
            self._present[idx] = True
            self._n_rows += 1
        self._data[idx] = values
        self._extent = max(self._extent, idx + 1)

    def dense(self, n: int | None = None) -> np.ndarray:
        """The first ``n`` rows (absent rows are zero); a view, not a copy."""
        if n is None:
            n = self._extent
        if n > self._data.shape[0]:
            self._grow(n - 1)
        return self._data[:n]

    def present_mask(self, n: int | None = None) -> np.ndarray:
        if n is None:
            n = self._extent
        if n > self._present.shape[0]:
            self._grow(n - 1)
        return self._present[:n]

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self._present[: self._extent])

    def copy(self) -> FactorMatrix:
        other = FactorMatrix(self.k, capacity=self._data.shape[0])
        other._data = self._data.copy()
        other._present = self._present.copy()
        other._n_rows = self._n_rows
        other._extent = self._extent
        return other

    def __len__(self) -> int:
        return self._n_rows

    def __contains__(self, idx) -> bool:
        return self.has_row(idx)


def init_row(matrix: FactorMatrix, idx: int, rng: np.random.Generator,
             mean: float = 0.0, stddev: float = 0.1) -> np.ndarray:
    """Create row ``idx`` from ``k`` independent normal draws.

    Raises ``KeyError`` if the row already exists, since re-initializing a
    trained row is always a caller bug.
    """
    if matrix.has_row(idx):
        raise KeyError(f"factor row {idx} already initialized")
    matrix.set_row(idx, rng.normal(mean, stddev, size=matrix.k))
    return matrix.row(idx)


class RankedList:
    """Recommended items in rank order, paired with their predicted scores."""

    __slots__ = ("items", "scores")

    def __init__(self, items=(), scores=()):
        self.items: list[str] = list(items)
        self.scores = np.asarray(scores, dtype=np.float64)
        if len(self.items) != len(self.scores):
            raise ValueError("items and scores must have equal length")

    def rank_of(self, item: str) -> int | None:
        """1-based rank of ``item``, or None if it is not in the list."""
        try:
            return self.items.index(item) + 1
        except ValueError:
            return None

    def __iter__(self):
        return zip(self.items, self.scores.tolist())

    def __len__(self) -> int:
        return len(self.items)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RankedList):
            return NotImplemented
        return self.items == other.items and np.array_equal(self.scores, other.scores)

    def __repr__(self) -> str:
        body = ", ".join(f"{i}:{s:.4g}" for i, s in self)
        return f"RankedList([{body}])"


def rank_candidates(scores: np.ndarray, candidates: np.ndarray, n: int) -> np.ndarray:
    """Order ``candidates`` by ``|1 - score|`` ascending, ties by index.

    ``candidates`` must be sorted ascending; the result holds at most ``n``
    of them.
    """
    if n <= 0 or len(candidates) == 0:
        return candidates[:0]
    key = np.abs(1.0 - scores[candidates])
    if n < len(candidates):
        kth = np.partition(key, n - 1)[n - 1]
        keep = key <= kth
        candidates = candidates[keep]
        key = key[keep]
    order = np.argsort(key, kind="stable")
    return candidates[order[:n]]


@runtime_checkable
class Recommender(Protocol):
    """What the prequential driver needs from a model."""

    def update(self, event: InteractionEvent) -> None: ...

    def score(self, user: str, item: str) -> float | None: ...

    def recommend(self, user: str, n: int, exclude=frozenset()) -> RankedList: ...

    def knows_user(self, user: str) -> bool: ...

    def knows_item(self, item: str) -> bool: ...


def node_seeds(master_seed: int, ordinal: int) -> tuple[np.random.SeedSequence, np.random.SeedSequence]:
    """Child seed streams ``(init, bootstrap)`` for model/node ``ordinal``.

    A plain ISGD model built from ``node_seeds(s, 0)[0]`` initializes its
    factors exactly like node 0 of an ensemble seeded with ``s``.
    """
    init = np.random.SeedSequence(master_seed, spawn_key=(ordinal, 0))
    boot = np.random.SeedSequence(master_seed, spawn_key=(ordinal, 1))
    return init, boot
