"""
Turning rating logs into positive-only streams
==============================================

Rating datasets keep only events in the top 20% of the rating scale: on a
1-5 scale that is rating 5, on 0-100 it is 80 and above.
"""

import io

from streamrec.ingest import DatasetSpec, iter_events, threshold_filter

raw = io.StringIO(
    "# user\titem\trating\ttimestamp\n"
    "u1\tm1\t5\t100\n"
    "u1\tm2\t4\t101\n"
    "u2\tm1\t3\t105\n"
    "u2\tm3\t5\t110\n"
)
spec = DatasetSpec(has_rating=True, rating_scale_min=1, rating_scale_max=5)
print("threshold:", spec.threshold)
for ev in threshold_filter(iter_events(raw, spec), spec):
    print(ev)

yahoo = DatasetSpec(has_rating=True, rating_scale_min=0, rating_scale_max=100)
print("0-100 threshold:", yahoo.threshold)
