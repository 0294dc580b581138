"""abductrank: predict fine-tuned abductive-NLI performance of frozen
encoders from a fast cosine-similarity proxy, and quantify how well the
proxy tracks a trained classification head.
"""

from .classifier import (
    HeadParams,
    Plausibility,
    TrainConfig,
    TrainHistory,
    evaluate_clf,
    head_prob,
    init_head,
    load_head,
    loss_and_grad,
    predict_clf,
    save_head,
    train_head,
)
from .data import (
    CLASSIFICATION_ROLES,
    SIMILARITY_ROLES,
    AnliInstance,
    EmbeddingRole,
    EmbeddingStore,
    Hypothesis,
    StoreKind,
    check_roles,
    load_instances,
    load_labels,
    pool_store,
    read_embedding_store,
    write_embedding_store,
)
from .errors import AbductRankError, DataError, DomainError, StatsError
from .kernels import cosine, linear_forward, mean_pool, softmax
from .similarity import SimPrediction, TrackResult, evaluate_sim, predict_sim
from .stats import (
    CorrelationReport,
    ModelRun,
    correlate_runs,
    fractional_ranks,
    pearson,
    read_runs_csv,
    reg_inc_beta,
    spearman,
    t_p_value,
    table1_fixture_path,
    write_runs_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AbductRankError",
    "AnliInstance",
    "CLASSIFICATION_ROLES",
    "CorrelationReport",
    "DataError",
    "DomainError",
    "EmbeddingRole",
    "EmbeddingStore",
    "HeadParams",
    "Hypothesis",
    "ModelRun",
    "Plausibility",
    "SIMILARITY_ROLES",
    "SimPrediction",
    "StatsError",
    "StoreKind",
    "TrackResult",
    "TrainConfig",
    "TrainHistory",
    "check_roles",
    "correlate_runs",
    "cosine",
    "evaluate_clf",
    "evaluate_sim",
    "fractional_ranks",
    "head_prob",
    "init_head",
    "linear_forward",
    "load_head",
    "load_instances",
    "load_labels",
    "loss_and_grad",
    "mean_pool",
    "pearson",
    "pool_store",
    "predict_clf",
    "predict_sim",
    "read_embedding_store",
    "read_runs_csv",
    "reg_inc_beta",
    "save_head",
    "softmax",
    "spearman",
    "t_p_value",
    "table1_fixture_path",
    "train_head",
    "write_embedding_store",
    "write_runs_csv",
]
