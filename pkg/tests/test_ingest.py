import pytest
from hypothesis import given, strategies as st

from streamrec.core import InteractionEvent
from streamrec.ingest import (
    DataError,
    DatasetSpec,
    format_event_line,
    iter_events,
    parse_event_line,
    read_events,
    split_warmup,
    threshold_filter,
)

RATED = DatasetSpec(has_rating=True, rating_scale_min=1, rating_scale_max=5)


def test_parse_full_line():
    ev = parse_event_line("u1\ti9\t5\t100", RATED)
    assert ev == InteractionEvent("u1", "i9", 5.0, "100")


def test_parse_pair_only():
    assert parse_event_line("u1\ti9\n") == InteractionEvent("u1", "i9")


def test_parse_trims_and_crlf():
    assert parse_event_line(" u1 \t i9 \r\n") == InteractionEvent("u1", "i9")


def test_parse_ids_stay_strings():
    ev = parse_event_line("007\t0042")
    assert ev.user == "007" and ev.item == "0042"


@pytest.mark.parametrize("line", ["u1", "u1\ti\t1\t2\t3", "u1\t\t", "u\ti\tfive"])
def test_parse_errors_carry_line(line):
    with pytest.raises(DataError, match="line 7"):
        parse_event_line(line, None, 7)


def test_rating_required_for_rated_spec():
    with pytest.raises(DataError):
        parse_event_line("u\ti", RATED, 1)


def test_iter_events_skips_comments_and_header():
    lines = ["user\titem\n", "# comment\n", "\n", "a\tb\n", "c\td\r\n"]
    got = list(iter_events(lines, DatasetSpec(header=True)))
    assert got == [InteractionEvent("a", "b"), InteractionEvent("c", "d")]


def test_iter_events_reports_source_line():
    with pytest.raises(DataError, match="line 3"):
        list(iter_events(["a\tb\n", "# x\n", "bad\n"]))


def test_timestamps_must_not_go_backwards():
    lines = ["a\tb\t\t10\n", "a\tc\t\t9\n"]
    with pytest.raises(DataError, match="backwards"):
        list(iter_events(lines))
    assert len(list(iter_events(lines, check_order=False))) == 2
    assert len(list(iter_events(["a\tb\t\t2009-05-04T23:08:57Z\n",
                                 "a\tc\t\t2009-05-05T01:00:00Z\n"]))) == 2


def test_read_events(tmp_path):
    p = tmp_path / "d.tsv"
    p.write_text("u\ti\t4\t1\nu\tj\t5\t2\n", encoding="utf-8")
    evs = read_events(DatasetSpec(p, has_rating=True, rating_scale_min=1, rating_scale_max=5))
    assert [e.item for e in evs] == ["i", "j"]


def _rated(ratings):
    return [InteractionEvent(f"u{n}", f"i{n}", float(r)) for n, r in enumerate(ratings)]


def test_threshold_one_to_five_keeps_fives():
    kept = threshold_filter(_rated([1, 2, 3, 4, 5, 5, 4]), RATED)
    assert [e.user for e in kept] == ["u4", "u5"]
    assert all(e.rating is None for e in kept)


def test_threshold_zero_to_hundred():
    spec = DatasetSpec(has_rating=True, rating_scale_min=0, rating_scale_max=100)
    assert spec.threshold == 80
    kept = threshold_filter(_rated([79, 80, 79.999, 100, 0, 95]), spec)
    assert [e.user for e in kept] == ["u1", "u3", "u5"]


def test_threshold_full_fraction_keeps_all():
    spec = DatasetSpec(has_rating=True, rating_scale_min=1, rating_scale_max=5,
                       keep_top_fraction=1.0)
    assert len(threshold_filter(_rated([1, 2, 3, 4, 5]), spec)) == 5


def test_threshold_missing_rating():
    with pytest.raises(DataError):
        threshold_filter([InteractionEvent("u", "i")], RATED)


@given(st.lists(st.integers(1, 5), max_size=50))
def test_threshold_idempotent_and_order_preserving(ratings):
    evs = _rated(ratings)
    once = threshold_filter(evs, RATED, drop_rating=False)
    assert threshold_filter(once, RATED, drop_rating=False) == once
    pos = [evs.index(e) for e in once]
    assert pos == sorted(pos)


@pytest.mark.parametrize("kwargs", [
    {"keep_top_fraction": 0.0}, {"keep_top_fraction": 1.5},
    {"has_rating": True}, {"has_rating": True, "rating_scale_min": 5, "rating_scale_max": 1},
])
def test_dataset_spec_validation(kwargs):
    with pytest.raises(ValueError):
        DatasetSpec(**kwargs)


def test_split_warmup_tenth():
    evs = _rated(range(100))
    warm, rest = split_warmup(evs, 0.1)
    assert warm == evs[:10] and rest == evs[10:]


def test_split_warmup_zero_and_floor():
    evs = _rated(range(9))
    assert split_warmup(evs, 0.0) == ([], evs)
    assert split_warmup(evs, 0.1) == ([], evs)


@given(st.integers(0, 300), st.floats(0, 0.99))
def test_split_warmup_concat(n, frac):
    evs = _rated(range(n))
    warm, rest = split_warmup(evs, frac)
    assert warm + rest == evs


_ids = st.text(st.characters(blacklist_categories=("Cc", "Zs", "Zl", "Zp"),
                             blacklist_characters="\t\n\r#"), min_size=1, max_size=8)


@given(_ids, _ids,
       st.none() | st.floats(allow_nan=False, allow_infinity=False),
       st.none() | st.from_regex(r"[0-9A-Za-z:.\-]{1,12}", fullmatch=True))
def test_format_parse_round_trip(user, item, rating, ts):
    ev = InteractionEvent(user, item, rating, ts)
    assert parse_event_line(format_event_line(ev)) == ev
