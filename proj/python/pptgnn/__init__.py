"""Flow-graph intrusion detection: window graphs, spatio-temporal GNN, link-prediction pre-training."""

from ._core import (
    CompatibilityError,
    ConfigError,
    Dataset,
    EmptyDataError,
    FlowRecord,
    FormatError,
    Model,
    SchemaError,
    evaluate,
    finetune,
    load_csv,
    load_model,
    macro_f1,
    prepare,
    pretrain,
    read_cache,
    synthesize,
    to_csv,
    train,
    weighted_f1,
    write_cache,
)

__all__ = [
    "CompatibilityError",
    "ConfigError",
    "Dataset",
    "EmptyDataError",
    "FlowRecord",
    "FormatError",
    "Model",
    "SchemaError",
    "evaluate",
    "finetune",
    "load_csv",
    "load_model",
    "macro_f1",
    "prepare",
    "pretrain",
    "read_cache",
    "synthesize",
    "to_csv",
    "train",
    "weighted_f1",
    "write_cache",
]
