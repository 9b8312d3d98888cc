"""Command-line driver for prequential experiments.

``streamrec run`` evaluates one model; ``streamrec sweep`` evaluates the ISGD
baseline followed by the ensemble at each node count.  Both write CSV files
under ``--out``.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .bagging import BaggedISGD, ConstantSampler
from .core import Hyperparameters, ModelDivergenceError, node_seeds
from .ingest import DataError, DatasetSpec, read_events, split_warmup, threshold_filter
from .isgd import ISGD
from .prequential import (
    STATUSES,
    EvalConfig,
    EvaluationAborted,
    StepRecord,
    moving_average,
    recall_series,
    run,
    summarize,
    warm_up,
)

log = logging.getLogger("streamrec")

SUMMARY_FILE = "summary.csv"
STEPS_FILE = "steps.csv"
MA_FILE = "recall20_ma.csv"


@dataclass
class RunConfig:
    dataset: DatasetSpec
    hp: Hyperparameters = field(default_factory=Hyperparameters)
    model: str = "isgd"
    nodes: int = 64
    eval: EvalConfig = field(default_factory=EvalConfig)
    seed: int = 42
    threads: int = 1
    output_dir: Path = Path("results")
    agg_missing: str = "zero"
    # "stream": warm-up goes through the ensemble's own update;
    # "copy": one ISGD model is warmed up and copied into every node
    bagged_warmup: str = "stream"
    stub_sampler_one: bool = False
    timing: bool = True

    def __post_init__(self):
        if self.model not in ("isgd", "bagged"):
            raise ValueError(f"model must be 'isgd' or 'bagged', got {self.model!r}")
        if self.model == "bagged" and self.nodes < 1:
            raise ValueError("nodes must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.bagged_warmup not in ("stream", "copy"):
            raise ValueError("bagged_warmup must be 'stream' or 'copy'")
        self.output_dir = Path(self.output_dir)


def build_model(cfg: RunConfig):
    if cfg.model == "isgd":
        return ISGD(cfg.hp, node_seeds(cfg.seed, 0)[0])
    samplers = [ConstantSampler(1) for _ in range(cfg.nodes)] if cfg.stub_sampler_one else None
    return BaggedISGD(cfg.hp, cfg.nodes, cfg.seed, missing=cfg.agg_missing,
                      samplers=samplers, threads=cfg.threads)


def load_stream(spec: DatasetSpec):
    events = read_events(spec)
    if spec.has_rating:
        events = threshold_filter(events, spec)
    return events


def _warm(cfg: RunConfig, model, warmup):
    if cfg.model == "bagged" and cfg.bagged_warmup == "copy":
        base = ISGD(cfg.hp, node_seeds(cfg.seed, 0)[0])
        seen = warm_up(base, warmup)
        model.seed_from(base)
        return seen
    return warm_up(model, warmup)


def evaluate(cfg: RunConfig, events) -> tuple[list[StepRecord], Exception | None]:
    """Warm up and run one model; returns records and the divergence, if any."""
    warmup, stream = split_warmup(events, cfg.eval.warmup_fraction)
    model = build_model(cfg)
    try:
        try:
            seen = _warm(cfg, model, warmup)
        except ModelDivergenceError as exc:
            return [], exc
        try:
            return run(stream, model, cfg.eval, seen), None
        except EvaluationAborted as exc:
            return exc.records, exc.cause
    finally:
        if hasattr(model, "close"):
            model.close()


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _ms(x) -> str:
    return "" if x is None else f"{x:.3f}"


def run_label(cfg: RunConfig) -> tuple[str, str]:
    return ("ISGD", "") if cfg.model == "isgd" else ("BaggedISGD", str(cfg.nodes))


def summary_header(cfg: RunConfig) -> list[str]:
    cols = ["model", "nodes"] + [f"recall@{c}" for c in cfg.eval.cutoffs]
    if cfg.timing:
        cols += ["update_ms", "rec_ms"]
    return cols + ["events"] + list(STATUSES)


def summary_row(cfg: RunConfig, records: list[StepRecord]) -> list[str]:
    s = summarize(records, cfg.eval.cutoffs)
    row = list(run_label(cfg)) + [_fmt(s.recall[c]) for c in cfg.eval.cutoffs]
    if cfg.timing:
        row += [_ms(s.mean_update_ms), _ms(s.mean_rec_ms)]
    return row + [str(len(records))] + [str(s.counts[st]) for st in STATUSES]


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_steps(path: Path, cfg: RunConfig, records: list[StepRecord]) -> None:
    header = ["position", "user", "item", "status"] + [f"recall@{c}" for c in cfg.eval.cutoffs]
    if cfg.timing:
        header += ["update_ms", "rec_ms"]
    rows = []
    for r in records:
        row = [r.position, r.user, r.item, r.status]
        row += [r.recall[c] if r.recall is not None else "" for c in cfg.eval.cutoffs]
        if cfg.timing:
            row += [_ms(r.update_ms), _ms(r.rec_ms)]
        rows.append(row)
    _write_csv(path, header, rows)


def write_moving_average(path: Path, cfg: RunConfig, records: list[StepRecord]) -> None:
    # Recall@20 when available, else the largest cutoff
    c = 20 if 20 in cfg.eval.cutoffs else cfg.eval.cutoffs[-1]
    ma = moving_average(recall_series(records, c), cfg.eval.moving_avg_window)
    _write_csv(path, ["scored_step", f"recall@{c}_ma"],
               ([n, repr(float(v))] for n, v in enumerate(ma, start=1)))


def _run_one(cfg: RunConfig, events, out: Path) -> tuple[list[str], Exception | None]:
    out.mkdir(parents=True, exist_ok=True)
    label = " ".join(x for x in run_label(cfg) if x)
    log.info("running %s on %d events", label, len(events))
    records, err = evaluate(cfg, events)
    write_steps(out / STEPS_FILE, cfg, records)
    write_moving_average(out / MA_FILE, cfg, records)
    return summary_row(cfg, records), err


def execute(cfg: RunConfig) -> int:
    """Run one configuration; writes summary, steps and moving-average CSVs."""
    events = load_stream(cfg.dataset)
    row, err = _run_one(cfg, events, cfg.output_dir)
    _write_csv(cfg.output_dir / SUMMARY_FILE, summary_header(cfg), [row])
    if err is not None:
        raise err
    return 0


def sweep(cfg: RunConfig, node_counts=(8, 16, 32, 64)) -> int:
    """Baseline ISGD plus one ensemble run per node count, same seed and data.

    Per-run step files go to ``<out>/isgd`` and ``<out>/m<M>``; all summary
    rows go to ``<out>/summary.csv``, which is rewritten after every run so
    a failure leaves the completed rows in place.
    """
    events = load_stream(cfg.dataset)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    runs = [(RunConfig(**{**cfg.__dict__, "model": "isgd"}), "isgd")]
    for m in node_counts:
        runs.append((RunConfig(**{**cfg.__dict__, "model": "bagged", "nodes": m}), f"m{m}"))
    rows = []
    for run_cfg, sub in runs:
        row, err = _run_one(run_cfg, events, cfg.output_dir / sub)
        rows.append(row)
        _write_csv(cfg.output_dir / SUMMARY_FILE, summary_header(cfg), rows)
        if err is not None:
            raise err
    return 0


def _int_list(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="TSV file: user, item[, rating[, timestamp]]")
    p.add_argument("--header", action="store_true", help="skip the first line")
    p.add_argument("--has-rating", action="store_true",
                   help="keep only events rated in the top of the scale")
    p.add_argument("--scale-min", type=float)
    p.add_argument("--scale-max", type=float)
    p.add_argument("--keep-top-frac", type=float, default=0.2)
    p.add_argument("--model", choices=("isgd", "bagged"), default="isgd")
    p.add_argument("--nodes", type=int, default=64)
    p.add_argument("--sweep-nodes", type=_int_list, default=[8, 16, 32, 64])
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--iter", type=int, default=1)
    p.add_argument("--lambda", dest="lam", type=float, default=0.01)
    p.add_argument("--eta", type=float, default=0.05)
    p.add_argument("--cutoffs", type=_int_list, default=[1, 5, 10, 20])
    p.add_argument("--list-size", type=int, default=20)
    p.add_argument("--warmup-frac", type=float, default=0.1)
    p.add_argument("--ma-window", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--agg-missing", choices=("zero", "skip"), default="zero")
    p.add_argument("--bagged-warmup", choices=("stream", "copy"), default="stream")
    p.add_argument("--stub-sampler-one", action="store_true",
                   help="test hook: every node trains every event exactly once")
    p.add_argument("--no-timing", action="store_true", help="omit timing columns")
    p.add_argument("--out", default="results")
    p.add_argument("-v", "--verbose", action="store_true")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="streamrec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("run", help="evaluate one model"))
    _add_common(sub.add_parser("sweep", help="baseline plus ensemble at each --sweep-nodes"))
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    dataset = DatasetSpec(args.input, args.has_rating, args.scale_min, args.scale_max,
                          args.keep_top_frac, args.header)
    hp = Hyperparameters(k=args.k, iters=args.iter, lam=args.lam, eta=args.eta)
    ev = EvalConfig(tuple(args.cutoffs), args.list_size, args.ma_window, args.warmup_frac)
    return RunConfig(dataset, hp, args.model, args.nodes, ev, args.seed, args.threads,
                     Path(args.out), args.agg_missing, args.bagged_warmup,
                     args.stub_sampler_one, not args.no_timing)


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        if args.command == "sweep":
            return sweep(cfg, args.sweep_nodes)
        return execute(cfg)
    except ModelDivergenceError as exc:
        print(f"streamrec: model diverged: {exc}", file=sys.stderr)
        return 3
    except (DataError, ValueError, OSError) as exc:
        print(f"streamrec: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
