"""
Online bagging with Poisson(1) resampling
=========================================

Each node of the ensemble trains on every event ``c`` times, where ``c`` is
drawn from Poisson(1) independently per node.  The histogram of draws below
should track e^-1 / k!.
"""

import math

import numpy as np

from streamrec import BaggedISGD, Hyperparameters, InteractionEvent, poisson1_draw

rng = np.random.default_rng(1)
draws = np.array([poisson1_draw(rng) for _ in range(200_000)])
for k in range(6):
    print(f"P(c={k})  empirical {np.mean(draws == k):.4f}   exact {math.exp(-1) / math.factorial(k):.4f}")

###############################################################################
# Train an 8-node ensemble.  Nodes see different resamples, so they hold
# different factor rows; predictions average over all of them.
ens = BaggedISGD(Hyperparameters(k=8), n_nodes=8, seed=7)
rng = np.random.default_rng(2)
for u, i in zip(rng.integers(20, size=3000), rng.integers(30, size=3000)):
    ens.update(InteractionEvent(f"u{u}", f"i{(u + i) % 30 if i % 3 else i}"))

print("per-node scores:", [None if s is None else round(s, 3) for s in ens.node_scores("u1", "i2")])
print("ensemble score: ", round(ens.score("u1", "i2"), 3))
print(ens.recommend("u1", 5))
