"""
Incremental matrix factorization on a stream
============================================

Train ISGD one event at a time and ask it for recommendations.  Every
observed (user, item) pair is a positive example with target 1, so items
are ranked by how close their predicted score is to 1.
"""

from streamrec import Hyperparameters, ISGD, InteractionEvent

model = ISGD(Hyperparameters(k=8, iters=1, lam=0.01, eta=0.05), seed=0)

stream = [("ann", "jazz"), ("ann", "blues"), ("bob", "jazz"), ("bob", "soul"),
          ("cat", "metal"), ("ann", "soul"), ("cat", "punk"), ("bob", "blues")] * 50
for user, item in stream:
    model.update(InteractionEvent(user, item))

###############################################################################
# Predicted affinity is the dot product of the two factor rows.
print("score(ann, jazz)  =", round(model.score("ann", "jazz"), 3))
print("score(ann, metal) =", round(model.score("ann", "metal"), 3))
print("score(ann, opera) =", model.score("ann", "opera"), "(never seen)")

###############################################################################
# Ranking excludes whatever the caller passes; a prequential run passes the
# items the user already knows.
print(model.recommend("cat", 3))
print(model.recommend("cat", 3, exclude={"metal", "punk"}))
