"""Test-then-train evaluation over an interaction stream.

For each event ``(u, i)``: if the model knows ``u`` and ``u`` has not seen
``i`` before, recommend a list excluding everything ``u`` has seen, score it
against ``i`` at each cutoff, then update the model with the event.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .core import InteractionEvent, ModelDivergenceError, RankedList

SCORED = "scored"
SKIPPED_UNKNOWN_USER = "skipped_unknown_user"
SKIPPED_REPEAT = "skipped_repeat"
STATUSES = (SCORED, SKIPPED_UNKNOWN_USER, SKIPPED_REPEAT)


@dataclass(frozen=True)
class EvalConfig:
    cutoffs: tuple[int, ...] = (1, 5, 10, 20)
    list_size: int = 20
    moving_avg_window: int = 10_000
    warmup_fraction: float = 0.10
    update_during_eval: bool = True

    def __post_init__(self):
        cutoffs = tuple(int(c) for c in self.cutoffs)
        object.__setattr__(self, "cutoffs", cutoffs)
        if not cutoffs or cutoffs[0] < 1:
            raise ValueError("cutoffs must be positive integers")
        if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
            raise ValueError(f"cutoffs must be strictly ascending, got {cutoffs}")
        if cutoffs[-1] > self.list_size:
            raise ValueError(
                f"largest cutoff {cutoffs[-1]} exceeds list size {self.list_size}")
        if self.moving_avg_window < 1:
            raise ValueError("moving_avg_window must be >= 1")
        if not 0 <= self.warmup_fraction < 1:
            raise ValueError("warmup_fraction must be in [0, 1)")


class SeenSets:
    """Items each user has co-occurred with.  Sets only grow."""

    def __init__(self):
        self._seen: dict[str, set[str]] = {}

    def add(self, user: str, item: str) -> None:
        s = self._seen.get(user)
        if s is None:
            self._seen[user] = {item}
        else:
            s.add(item)

    def get(self, user: str) -> frozenset[str]:
        return frozenset(self._seen.get(user, ()))

    def has(self, user: str, item: str) -> bool:
        s = self._seen.get(user)
        return s is not None and item in s

    def __len__(self) -> int:
        return len(self._seen)


@dataclass
class StepRecord:
    position: int
    user: str
    item: str
    status: str
    # cutoff -> 0/1, only for scored steps
    recall: dict[int, int] | None = None
    update_ns: int | None = None
    rec_ns: int | None = None

    @property
    def update_ms(self) -> float | None:
        return None if self.update_ns is None else self.update_ns / 1e6

    @property
    def rec_ms(self) -> float | None:
        return None if self.rec_ns is None else self.rec_ns / 1e6


class EvaluationAborted(RuntimeError):
    """Raised when the model diverges mid-stream; ``records`` holds what ran."""

    def __init__(self, records: list[StepRecord], cause: Exception):
        super().__init__(f"evaluation aborted after {len(records)} steps: {cause}")
        self.records = records
        self.cause = cause


def score_step(ranked: RankedList, observed: str, cutoffs: Iterable[int]) -> dict[int, int]:
    """Recall@C for a single held-out item: 1 iff it sits in the top C."""
    rank = ranked.rank_of(observed)
    return {c: int(rank is not None and rank <= c) for c in cutoffs}


def warm_up(model, events: Iterable[InteractionEvent], seen: SeenSets | None = None) -> SeenSets:
    """Train on ``events`` without scoring, recording them as seen."""
    if seen is None:
        seen = SeenSets()
    for ev in events:
        model.update(ev)
        seen.add(ev.user, ev.item)
    return seen


def iter_run(stream: Iterable[InteractionEvent], model, cfg: EvalConfig | None = None,
             seen: SeenSets | None = None, clock=time.perf_counter_ns) -> Iterator[StepRecord]:
    """Yield one :class:`StepRecord` per event of ``stream``.

    ``seen`` should carry the warm-up slice; it is updated in place.
    Model divergence propagates as :class:`ModelDivergenceError`.
    """
    cfg = cfg if cfg is not None else EvalConfig()
    seen = seen if seen is not None else SeenSets()
    for pos, ev in enumerate(stream):
        u, i = ev.user, ev.item
        rec = StepRecord(pos, u, i, SKIPPED_UNKNOWN_USER)
        if model.knows_user(u):
            if seen.has(u, i):
                rec.status = SKIPPED_REPEAT
            else:
                exclude = seen.get(u)
                t0 = clock()
                ranked = model.recommend(u, cfg.list_size, exclude)
                rec.rec_ns = clock() - t0
                rec.recall = score_step(ranked, i, cfg.cutoffs)
                rec.status = SCORED
        if cfg.update_during_eval:
            t0 = clock()
            try:
                model.update(ev)
            finally:
                rec.update_ns = clock() - t0
        seen.add(u, i)
        yield rec


def run(stream: Iterable[InteractionEvent], model, cfg: EvalConfig | None = None,
        seen: SeenSets | None = None, clock=time.perf_counter_ns) -> list[StepRecord]:
    """Evaluate ``model`` prequentially over ``stream``.

    Raises :class:`EvaluationAborted` if the model diverges; its
    ``records`` cover every step before the one that failed.
    """
    records: list[StepRecord] = []
    it = iter_run(stream, model, cfg, seen, clock)
    try:
        for rec in it:
            records.append(rec)
    except ModelDivergenceError as exc:
        raise EvaluationAborted(records, exc) from exc
    return records


@dataclass
class Summary:
    recall: dict[int, float | None]
    mean_update_ms: float | None
    mean_rec_ms: float | None
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def n_events(self) -> int:
        return sum(self.counts.values())


def _mean(values) -> float | None:
    return float(np.mean(values)) if len(values) else None


def summarize(records: list[StepRecord], cutoffs: Iterable[int] | None = None) -> Summary:
    """Average recall over scored steps and timings over the steps that ran them.

    Recall means are None (not 0) when nothing was scored.
    """
    scored = [r for r in records if r.status == SCORED]
    if cutoffs is None:
        cutoffs = sorted(scored[0].recall) if scored else []
    recall = {c: _mean([r.recall[c] for r in scored]) for c in cutoffs}
    upd = [r.update_ns for r in records if r.update_ns is not None]
    rec = [r.rec_ns for r in records if r.rec_ns is not None]
    counts = {s: 0 for s in STATUSES}
    for r in records:
        counts[r.status] += 1
    return Summary(
        recall=recall,
        mean_update_ms=None if not upd else _mean(upd) / 1e6,
        mean_rec_ms=None if not rec else _mean(rec) / 1e6,
        counts=counts,
    )


def recall_series(records: Iterable[StepRecord], cutoff: int) -> np.ndarray:
    """Per-scored-step Recall@cutoff values; skipped steps are dropped."""
    return np.array([r.recall[cutoff] for r in records if r.status == SCORED], dtype=float)


def moving_average(series, n: int) -> np.ndarray:
    """Trailing mean over ``n`` values; the first ``n - 1`` points use the
    running mean of everything so far."""
    if n < 1:
        raise ValueError("window must be >= 1")
    x = np.asarray(series, dtype=float)
    if x.size == 0:
        return x
    csum = np.cumsum(x)
    out = np.empty_like(x)
    head = min(n, x.size)
    out[:head] = csum[:head] / np.arange(1, head + 1)
    if x.size > n:
        out[n:] = (csum[n:] - csum[:-n]) / n
    return out
