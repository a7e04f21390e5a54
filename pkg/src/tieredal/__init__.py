"""Tiered-hardness interactive learning: active learning for hard instances,
per-class submodular mutual information suggestions for intermediate ones,
highest-confidence auto-labeling for easy ones, with verify-vs-correct cost
accounting and a live labeling session service."""

from .annotate import (OracleConfig, RatioStats, TimingRecord, labeling_cost,
                       labeling_efficiency, oracle_annotate, ratio_stats,
                       records_to_csv)
from .data import (Dataset, Partitioning, PoolState, generate_blobs, import_csv,
                   load_dataset, partition_unlabeled, save_dataset, split_pools)
from .kernels import cosine_kernel, log_det, logdetmi_eval, regularize
from .model import (ModelParams, TrainConfig, accuracy, features, grad_embedding,
                    grad_embeddings, predict_proba, train)
from .orchestrate import (ExperimentConfig, RoundRecord, cost_accuracy_curve,
                          run_experiment, run_round, select_round)
from .select import (SelectionBatch, SelectionItem, auto_label_select,
                     badge_select, entropy, entropy_select)
from .smi import (ClassQuota, GreedyTrace, compute_quotas, greedy_maximize,
                  max_marginal_dedup, smi_suggest)

__version__ = "0.1.0"

__all__ = [
    "OracleConfig", "RatioStats", "TimingRecord", "labeling_cost",
    "labeling_efficiency", "oracle_annotate", "ratio_stats", "records_to_csv",
    "Dataset", "Partitioning", "PoolState", "generate_blobs", "import_csv",
    "load_dataset", "partition_unlabeled", "save_dataset", "split_pools",
    "cosine_kernel", "log_det", "logdetmi_eval", "regularize",
    "ModelParams", "TrainConfig", "accuracy", "features", "grad_embedding",
    "grad_embeddings", "predict_proba", "train",
    "ExperimentConfig", "RoundRecord", "cost_accuracy_curve", "run_experiment",
    "run_round", "select_round",
    "SelectionBatch", "SelectionItem", "auto_label_select", "badge_select",
    "entropy", "entropy_select",
    "ClassQuota", "GreedyTrace", "compute_quotas", "greedy_maximize",
    "max_marginal_dedup", "smi_suggest",
]
