"""Synthetic positive-only streams with planted cluster structure."""
from __future__ import annotations

import numpy as np

from .core import InteractionEvent


def clustered_stream(n_users: int = 5000, n_items: int = 500, n_clusters: int = 20,
                     n_events: int = 100_000, noise: float = 0.2,
                     seed: int = 0) -> list[InteractionEvent]:
    """Events where users mostly pick items from their own cluster.

    Users and items are each assigned one of ``n_clusters`` groups.  Every
    event picks a user uniformly at random, then with probability
    ``1 - noise`` an item from the user's group and otherwise any item
    uniformly.  Ids are ``u<n>`` and ``i<n>``.
    """
    if not 0 <= noise <= 1:
        raise ValueError("noise must be in [0, 1]")
    if n_clusters < 1 or n_clusters > min(n_users, n_items):
        raise ValueError("need 1 <= n_clusters <= min(n_users, n_items)")
    rng = np.random.default_rng(seed)
    user_cluster = rng.integers(n_clusters, size=n_users)
    item_cluster = rng.permutation(np.arange(n_items) % n_clusters)
    members = [np.flatnonzero(item_cluster == c) for c in range(n_clusters)]

    users = rng.integers(n_users, size=n_events)
    noisy = rng.random(n_events) < noise
    uniform_items = rng.integers(n_items, size=n_events)
    pick = rng.random(n_events)
    items = np.empty(n_events, dtype=np.int64)
    for e in range(n_events):
        if noisy[e]:
            items[e] = uniform_items[e]
        else:
            group = members[user_cluster[users[e]]]
            items[e] = group[int(pick[e] * len(group))]
    return [InteractionEvent(f"u{u}", f"i{i}") for u, i in zip(users.tolist(), items.tolist())]
