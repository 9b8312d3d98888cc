"""Reading interaction logs and preparing them for prequential runs.

Input is tab-separated, one event per line, in chronological order::

    <user>\t<item>[\t<rating>[\t<timestamp>]]

Lines starting with ``#`` and blank lines are ignored.  Ids are kept as
opaque strings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Iterator

from .core import InteractionEvent


class DataError(ValueError):
    """Input data does not satisfy the expected format or ordering."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class DatasetSpec:
    path: str | Path | None = None
    has_rating: bool = False
    rating_scale_min: float | None = None
    rating_scale_max: float | None = None
    keep_top_fraction: float = 0.20
    header: bool = False

    def __post_init__(self):
        if not 0 < self.keep_top_fraction <= 1:
            raise ValueError("keep_top_fraction must be in (0, 1]")
        if self.has_rating:
            if self.rating_scale_min is None or self.rating_scale_max is None:
                raise ValueError("rating datasets need rating_scale_min and rating_scale_max")
            if not self.rating_scale_min < self.rating_scale_max:
                raise ValueError("rating_scale_min must be below rating_scale_max")

    @property
    def threshold(self) -> float:
        """Lowest rating that counts as positive."""
        lo, hi = self.rating_scale_min, self.rating_scale_max
        return hi - self.keep_top_fraction * (hi - lo)


def parse_event_line(line: str, spec: DatasetSpec | None = None,
                     lineno: int | None = None) -> InteractionEvent:
    """Parse one TSV record.

    Columns are positional: a third column is always the rating and a
    fourth the timestamp.  A rating column is mandatory when
    ``spec.has_rating`` is set.
    """
    fields = [f.strip() for f in line.rstrip("\r\n").split("\t")]
    if len(fields) < 2:
        raise DataError(f"expected at least 2 tab-separated fields, got {len(fields)}", lineno)
    if len(fields) > 4:
        raise DataError(f"expected at most 4 tab-separated fields, got {len(fields)}", lineno)
    user, item = fields[0], fields[1]
    if not user or not item:
        raise DataError("empty user or item field", lineno)
    rating = None
    if len(fields) >= 3 and fields[2]:
        try:
            rating = float(fields[2])
        except ValueError:
            raise DataError(f"rating {fields[2]!r} is not a number", lineno) from None
        if not math.isfinite(rating):
            raise DataError(f"rating {fields[2]!r} is not finite", lineno)
    if spec is not None and spec.has_rating and rating is None:
        raise DataError("missing rating field", lineno)
    timestamp = fields[3] if len(fields) == 4 and fields[3] else None
    return InteractionEvent(user, item, rating, timestamp)


def format_event_line(event: InteractionEvent) -> str:
    fields = [event.user, event.item]
    if event.rating is not None or event.timestamp is not None:
        fields.append("" if event.rating is None else repr(float(event.rating)))
    if event.timestamp is not None:
        fields.append(event.timestamp)
    return "\t".join(fields) + "\n"


def _time_key(ts: str):
    try:
        return (0, float(ts), "")
    except ValueError:
        return (1, 0.0, ts)


def iter_events(lines: Iterable[str], spec: DatasetSpec | None = None,
                check_order: bool = True) -> Iterator[InteractionEvent]:
    """Parse ``lines`` lazily, raising :class:`DataError` on bad records.

    When timestamps are present they must be non-decreasing; numeric
    timestamps compare as numbers, anything else as text.
    """
    spec = spec if spec is not None else DatasetSpec()
    last = None
    for lineno, line in enumerate(lines, start=1):
        if lineno == 1 and spec.header:
            continue
        if not line.strip() or line.startswith("#"):
            continue
        ev = parse_event_line(line, spec, lineno)
        if check_order and ev.timestamp is not None:
            key = _time_key(ev.timestamp)
            if last is not None and key < last:
                raise DataError(f"timestamp {ev.timestamp!r} goes backwards", lineno)
            last = key
        yield ev


def read_events(spec: DatasetSpec, check_order: bool = True) -> list[InteractionEvent]:
    if spec.path is None:
        raise ValueError("dataset spec has no path")
    with open(spec.path, encoding="utf-8", newline="") as fh:
        return list(iter_events(fh, spec, check_order))


def write_events(path, events: Iterable[InteractionEvent]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for ev in events:
            fh.write(format_event_line(ev))


def threshold_filter(events: Iterable[InteractionEvent], spec: DatasetSpec,
                     drop_rating: bool = True) -> list[InteractionEvent]:
    """Keep events rated in the top ``keep_top_fraction`` of the scale.

    The boundary is inclusive.  Ratings are dropped from the output unless
    ``drop_rating`` is False, in which case the filter is idempotent.
    """
    if not spec.has_rating:
        raise ValueError("threshold_filter needs a rating dataset spec")
    cut = spec.threshold
    kept = []
    for n, ev in enumerate(events):
        if ev.rating is None:
            raise DataError(f"event {n} ({ev.user}, {ev.item}) has no rating")
        if ev.rating >= cut:
            kept.append(replace(ev, rating=None) if drop_rating else ev)
    return kept


def split_warmup(events: list[InteractionEvent], fraction: float):
    """Split off the first ``floor(fraction * len(events))`` events."""
    if not 0 <= fraction < 1:
        raise ValueError("fraction must be in [0, 1)")
    n = math.floor(fraction * len(events))
    return events[:n], events[n:]
