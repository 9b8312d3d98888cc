"""Incremental matrix factorization and online bagging for streaming top-N
recommendation, with a prequential evaluation harness."""

from .bagging import BaggedISGD, ConstantSampler, PoissonSampler, poisson1_draw
from .core import (
    FactorMatrix,
    Hyperparameters,
    IdIndex,
    InteractionEvent,
    ModelDivergenceError,
    RankedList,
    Recommender,
    init_row,
    node_seeds,
)
from .ingest import DataError, DatasetSpec, parse_event_line, read_events, split_warmup, threshold_filter
from .isgd import ISGD
from .prequential import EvalConfig, StepRecord, moving_average, run, score_step, summarize, warm_up

__version__ = "0.1.0"

__all__ = [
    "BaggedISGD", "ConstantSampler", "DataError", "DatasetSpec", "EvalConfig",
    "FactorMatrix", "Hyperparameters", "ISGD", "IdIndex", "InteractionEvent",
    "ModelDivergenceError", "PoissonSampler", "RankedList", "Recommender",
    "StepRecord", "init_row", "moving_average", "node_seeds", "parse_event_line",
    "poisson1_draw", "read_events", "run", "score_step", "split_warmup",
    "summarize", "threshold_filter", "warm_up",
]
