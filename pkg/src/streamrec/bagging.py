"""Online bagging over ISGD nodes.

Each incoming event is replayed ``c ~ Poisson(1)`` times on every node, with
``c`` drawn independently per node.  This is the single-pass limit of
bootstrap resampling when the stream length is unknown.  Predictions are
the mean of the node dot products.
"""
from __future__ import annotations

import bisect
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .core import (
    Hyperparameters,
    IdIndex,
    InteractionEvent,
    ModelDivergenceError,
    RankedList,
    node_seeds,
    rank_candidates,
)
from .isgd import ISGD, _mask_out


def _poisson1_cdf() -> list[float]:
    cdf, p, k = [], math.exp(-1.0), 0
    total = 0.0
    while True:
        total += p
        cdf.append(total)
        k += 1
        p /= k
        if total + p == total:
            break
    return cdf


# cumulative Poisson(1) probabilities until the sum stops changing (k ~ 18)
_POISSON1_CDF = _poisson1_cdf()


def poisson1_pmf(k: int) -> float:
    return math.exp(-1.0) / math.factorial(k)


def poisson1_draw(rng: np.random.Generator) -> int:
    """Draw from Poisson(1) by inverting the cumulative distribution.

    The table is exact to double precision.  A uniform beyond its last entry
    (probability below 1e-16) falls back to sequential inversion, so there
    is no hard truncation.
    """
    u = rng.random()
    k = bisect.bisect_right(_POISSON1_CDF, u)
    if k < len(_POISSON1_CDF):
        return k
    total = _POISSON1_CDF[-1]
    p = poisson1_pmf(k)
    while u >= total and p > 0.0:
        total += p
        k += 1
        p /= k
    return k


class PoissonSampler:
    """Bootstrap count source for one node."""

    def __init__(self, seed=None):
        self.rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    def draw(self) -> int:
        return poisson1_draw(self.rng)


class ConstantSampler:
    """Always returns the same count.  A test hook, not a bootstrap."""

    def __init__(self, value: int = 1):
        if value < 0:
            raise ValueError("count must be non-negative")
        self.value = value

    def draw(self) -> int:
        return self.value


class BaggedISGD:
    """Ensemble of ``n_nodes`` ISGD models trained on Poisson(1) resamples.

    Parameters
    ----------
    hp : Hyperparameters
        Shared by every node.
    n_nodes : int
        Number of bootstrap nodes ``M``.
    seed : int
        Master seed.  Node ``m`` initializes factors from
        ``node_seeds(seed, m)[0]`` and draws counts from
        ``node_seeds(seed, m)[1]``.
    missing : {"zero", "skip"}
        How a node without the user or item row enters the average.
        ``"zero"`` counts it as a 0 score over all ``M`` nodes; ``"skip"``
        averages only the nodes holding both rows.
    samplers : list, optional
        Replacement count sources, one per node (anything with ``draw()``).
    threads : int
        Worker threads for per-node scoring in :meth:`recommend`.  Results
        do not depend on it.
    """

    def __init__(self, hp: Hyperparameters | None = None, n_nodes: int = 64,
                 seed: int = 42, missing: str = "zero", samplers=None,
                 threads: int = 1):
        if n_nodes < 1:
            raise ValueError(f"n_nodes must be >= 1, got {n_nodes}")
        if missing not in ("zero", "skip"):
            raise ValueError(f"missing must be 'zero' or 'skip', got {missing!r}")
        if threads < 1:
            raise ValueError(f"threads must be >= 1, got {threads}")
        self.hp = hp if hp is not None else Hyperparameters()
        self.n_nodes = n_nodes
        self.missing = missing
        self.threads = threads
        self.user_index = IdIndex()
        self.item_index = IdIndex()
        self.nodes: list[ISGD] = []
        default_samplers = []
        for m in range(n_nodes):
            init_seq, boot_seq = node_seeds(seed, m)
            self.nodes.append(ISGD(self.hp, init_seq, self.user_index, self.item_index))
            default_samplers.append(PoissonSampler(boot_seq))
        if samplers is None:
            samplers = default_samplers
        elif len(samplers) != n_nodes:
            raise ValueError(f"expected {n_nodes} samplers, got {len(samplers)}")
        self.samplers = list(samplers)
        self._pool: ThreadPoolExecutor | None = None

    def update(self, event: InteractionEvent) -> None:
        u = self.user_index.intern(event.user)
        i = self.item_index.intern(event.item)
        for m, (node, sampler) in enumerate(zip(self.nodes, self.samplers)):
            c = sampler.draw()
            if c > 0:
                try:
                    node.update_indices(u, i, c)
                except ModelDivergenceError as exc:
                    raise ModelDivergenceError(str(exc), node=m) from exc

    def seed_from(self, base: ISGD) -> None:
        """Copy a trained single model into every node.

        Alternative warm start to streaming the warm-up slice through
        :meth:`update`.  Only valid on an ensemble that has seen no data.
        """
        if len(self.user_index) or len(self.item_index):
            raise RuntimeError("seed_from requires an empty ensemble")
        if base.hp.k != self.hp.k:
            raise ValueError("latent size mismatch")
        for uid in base.user_index:
            self.user_index.intern(uid)
        for iid in base.item_index:
            self.item_index.intern(iid)
        for node in self.nodes:
            node.users = base.users.copy()
            node.items = base.items.copy()

    def knows_user(self, user: str) -> bool:
        return any(node.knows_user(user) for node in self.nodes)

    def knows_item(self, item: str) -> bool:
        return any(node.knows_item(item) for node in self.nodes)

    def node_scores(self, user: str, item: str) -> list[float | None]:
        return [node.score(user, item) for node in self.nodes]

    def score(self, user: str, item: str) -> float | None:
        """Mean node prediction; None when no node holds both rows."""
        scores = self.node_scores(user, item)
        held = [s for s in scores if s is not None]
        if not held:
            return None
        total = 0.0
        for s in scores:
            if s is not None:
                total += s
        return total / (self.n_nodes if self.missing == "zero" else len(held))

    aggregate_score = score

    def _node_vector(self, node: ISGD, u: int, n_items: int):
        if not node.users.has_row(u):
            return None
        return node.items.dense(n_items) @ node.users.row(u)

    def score_all(self, user: str) -> tuple[np.ndarray, np.ndarray]:
        """Averaged scores for every interned item, plus a held-by-any mask.

        Node vectors are summed in node order regardless of ``threads``.
        """
        u = self.user_index.get(user)
        if u is None or not self.knows_user(user):
            raise KeyError(f"unknown user {user!r}")
        n_items = len(self.item_index)
        if self.threads > 1 and self.n_nodes > 1:
            if self._pool is None:
                self._pool = ThreadPoolExecutor(self.threads)
            vectors = list(self._pool.map(
                lambda node: self._node_vector(node, u, n_items), self.nodes))
        else:
            vectors = [self._node_vector(node, u, n_items) for node in self.nodes]

        total = None
        if self.missing == "zero":
            held = np.zeros(n_items, dtype=bool)
            for node, v in zip(self.nodes, vectors):
                held |= node.items.present_mask(n_items)
                if v is not None:
                    total = v.copy() if total is None else total + v
            return total / self.n_nodes, held

        count = np.zeros(n_items)
        for node, v in zip(self.nodes, vectors):
            if v is not None:
                total = v.copy() if total is None else total + v
                count += node.items.present_mask(n_items)
        held = count > 0
        scores = np.zeros(n_items)
        np.divide(total, count, out=scores, where=held)
        return scores, held

    def recommend(self, user: str, n: int, exclude=frozenset()) -> RankedList:
        scores, mask = self.score_all(user)
        _mask_out(mask, self.item_index, exclude)
        top = rank_candidates(scores, np.flatnonzero(mask), n)
        return RankedList([self.item_index.reverse(j) for j in top], scores[top])

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
