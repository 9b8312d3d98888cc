import csv

import pytest

from streamrec.cli import main
from streamrec.ingest import write_events
from streamrec.synthetic import clustered_stream


@pytest.fixture(scope="module")
def small_tsv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "events.tsv"
    write_events(path, clustered_stream(n_users=60, n_items=40, n_clusters=4,
                                        n_events=200, seed=3))
    return path


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_isgd_run_outputs(small_tsv, tmp_path):
    assert main(["run", "--input", str(small_tsv), "--out", str(tmp_path)]) == 0
    for name in ("summary.csv", "steps.csv", "recall20_ma.csv"):
        assert (tmp_path / name).exists()
    (row,) = _rows(tmp_path / "summary.csv")
    assert [c for c in row if c.startswith("recall@")] == [
        "recall@1", "recall@5", "recall@10", "recall@20"]
    assert row["model"] == "ISGD"
    assert int(row["events"]) == 180
    steps = _rows(tmp_path / "steps.csv")
    assert len(steps) == 180
    scored = [s for s in steps if s["status"] == "scored"]
    assert len(_rows(tmp_path / "recall20_ma.csv")) == len(scored) == int(row["scored"])
    # milliseconds with three decimals
    assert len(row["update_ms"].split(".")[1]) == 3


def test_rated_input_is_filtered(tmp_path):
    data = tmp_path / "rated.tsv"
    data.write_text("".join(f"u{n % 3}\ti{n}\t{1 + n % 5}\t{n}\n" for n in range(50)))
    out = tmp_path / "out"
    assert main(["run", "--input", str(data), "--has-rating", "--scale-min", "1",
                 "--scale-max", "5", "--warmup-frac", "0", "--out", str(out)]) == 0
    (row,) = _rows(out / "summary.csv")
    assert int(row["events"]) == 10


def test_no_timing_drops_columns(small_tsv, tmp_path):
    main(["run", "--input", str(small_tsv), "--no-timing", "--out", str(tmp_path)])
    (row,) = _rows(tmp_path / "summary.csv")
    assert "update_ms" not in row and "rec_ms" not in row
    assert "update_ms" not in _rows(tmp_path / "steps.csv")[0]


def test_sweep_rows(small_tsv, tmp_path):
    assert main(["sweep", "--input", str(small_tsv), "--sweep-nodes", "2,3",
                 "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "summary.csv")
    assert [(r["model"], r["nodes"]) for r in rows] == [
        ("ISGD", ""), ("BaggedISGD", "2"), ("BaggedISGD", "3")]
    assert (tmp_path / "m3" / "steps.csv").exists()


def test_sweep_empty_node_list(small_tsv, tmp_path):
    assert main(["sweep", "--input", str(small_tsv), "--sweep-nodes", "",
                 "--out", str(tmp_path)]) == 0
    assert [r["model"] for r in _rows(tmp_path / "summary.csv")] == ["ISGD"]


def test_sweep_default_layout():
    from streamrec.cli import make_parser
    args = make_parser().parse_args(["sweep", "--input", "x"])
    assert args.sweep_nodes == [8, 16, 32, 64]
    assert (args.k, args.iter, args.lam, args.eta, args.nodes, args.seed) == (8, 1, 0.01, 0.05, 64, 42)


def test_copy_warmup_mode(small_tsv, tmp_path):
    assert main(["run", "--input", str(small_tsv), "--model", "bagged", "--nodes", "3",
                 "--bagged-warmup", "copy", "--out", str(tmp_path)]) == 0


def test_errors_exit_nonzero(tmp_path, capsys):
    assert main(["run", "--input", str(tmp_path / "missing.tsv")]) != 0
    bad = tmp_path / "bad.tsv"
    bad.write_text("a\tb\nlonely\n")
    assert main(["run", "--input", str(bad), "--out", str(tmp_path)]) != 0
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 2 and "line 2" in err[1]
    assert main(["run", "--input", str(bad), "--cutoffs", "1,50"]) != 0


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_exit(small_tsv, tmp_path):
    code = main(["run", "--input", str(small_tsv), "--eta", "1e9", "--lambda", "0",
                 "--out", str(tmp_path)])
    assert code == 3
    assert (tmp_path / "summary.csv").exists()
