"""
Prequential comparison of ISGD and BaggedISGD
=============================================

Generate a clustered synthetic stream, warm both models on the first 10% of
events, then test-then-train on the rest.  Recall@C is 1 when the observed
item is among the top C recommendations.
"""

import numpy as np

from streamrec import BaggedISGD, EvalConfig, Hyperparameters, ISGD, node_seeds
from streamrec.prequential import moving_average, recall_series, run, summarize, warm_up
from streamrec.ingest import split_warmup
from streamrec.synthetic import clustered_stream

events = clustered_stream(n_users=1000, n_items=300, n_clusters=15, n_events=30_000, seed=0)
warm, stream = split_warmup(events, 0.1)
hp = Hyperparameters(k=8, iters=1, lam=0.01, eta=0.05)
cfg = EvalConfig(moving_avg_window=2000)

for label, model in [("ISGD", ISGD(hp, node_seeds(0, 0)[0])),
                     ("M=8", BaggedISGD(hp, 8, seed=0)),
                     ("M=16", BaggedISGD(hp, 16, seed=0))]:
    seen = warm_up(model, warm)
    records = run(stream, model, cfg, seen)
    s = summarize(records, cfg.cutoffs)
    recall = "  ".join(f"@{c}={v:.3f}" for c, v in s.recall.items())
    print(f"{label:>5}  {recall}  upd={s.mean_update_ms:.3f}ms  rec={s.mean_rec_ms:.3f}ms")
    ma = moving_average(recall_series(records, 20), cfg.moving_avg_window)
    print("       Recall@20 moving average at 25/50/75/100%:",
          np.round(ma[[len(ma) // 4, len(ma) // 2, 3 * len(ma) // 4, -1]], 3))

###############################################################################
# The same experiment from the command line, writing CSVs:
#
#   streamrec sweep --input events.tsv --sweep-nodes 8,16,32,64 --out results/
