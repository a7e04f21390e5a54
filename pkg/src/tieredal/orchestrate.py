"""The tiered-hardness selection loop and its baselines.

Each round selects hard instances with an active-learning strategy,
intermediate instances with per-class LogDetMI suggestions, and easy instances
by highest-confidence auto-labeling; annotations are costed under the
verify-vs-correct model and the model is retrained from scratch.
"""

from __future__ import annotations

import dataclasses
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import annotate as ann
from .data import Dataset, PoolState, generate_blobs, import_csv, load_dataset, \
    partition_unlabeled
from .errors import BudgetExhaustedError, InvalidArgumentError
from .kernels import DEFAULT_LAMBDA
from .model import ModelParams, TrainConfig, accuracy, grad_embeddings, \
    predict_proba, train
from .select import SelectionBatch, SelectionItem, TIER_EASY, TIER_HARD, \
    TIER_INTERMEDIATE, auto_label_select, badge_select, entropy_select
from .smi import ClassQuota, compute_quotas, smi_suggest

METHODS = ("clarifier", "al_suggest", "al_plain")
AL_STRATEGIES = ("entropy", "badge")


@dataclass
class ExperimentConfig:
    # Dataset: a TALD/CSV path, or synthetic blobs when dataset_path is None.
    dataset_path: str | None = None
    blob_classes: int = 20
    blob_per_class: int = 60
    blob_dim: int = 8
    blob_spread: float = 2.0
    test_fraction: float = 0.25
    seed_size: int = 40
    b1: int = 10
    b2: int = 10
    b3: int = 10
    rounds: int = 8
    method: str = "clarifier"
    al_strategy: str = "entropy"
    auto_assign_strategy: str = "highest_confidence"
    human_correct_strategy: str = "logdetmi"
    num_partitions: int = 1
    thread_count: int = 1
    c_a: float = 3.0
    c_v: float = 1.0
    oracle_mode: str = ann.MODE_PERFECT
    oracle_epsilon: float = 0.0
    timing_noise: float = 0.0
    smi_lambda: float = DEFAULT_LAMBDA
    auto_label_threshold: float | None = None
    freeze_hidden_after_round0: bool = False
    train: TrainConfig = field(default_factory=TrainConfig)
    rng_seed: int = 0
    runs: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidArgumentError(f"unknown method {self.method!r}")
        if self.al_strategy not in AL_STRATEGIES:
            raise InvalidArgumentError(f"unknown al_strategy {self.al_strategy!r}")
        if self.auto_assign_strategy != "highest_confidence":
            raise InvalidArgumentError("auto_assign_strategy must be highest_confidence")
        if self.human_correct_strategy != "logdetmi":
            raise InvalidArgumentError("human_correct_strategy must be logdetmi")
        if min(self.b1, self.b2, self.b3) < 0:
            raise InvalidArgumentError("budgets must be non-negative")
        if self.method == "clarifier" and self.b1 + self.b2 + self.b3 < 1:
            raise InvalidArgumentError("clarifier needs b1 + b2 + b3 >= 1")
        if self.rounds < 0 or self.runs < 1:
            raise InvalidArgumentError("rounds must be >= 0 and runs >= 1")


@dataclass
class RoundRecord:
    round: int
    test_accuracy: float
    cost_round: float
    cost_cumulative: float
    tiers: dict = field(default_factory=dict)  # tier -> {selected, suggestion_correct}
    wall_time: float = 0.0  # not serialized; results files must be reproducible

    def to_json_dict(self) -> dict:
        return {
            "round": self.round,
            "test_accuracy": self.test_accuracy,
            "cost_round": self.cost_round,
            "cost_cumulative": self.cost_cumulative,
            "tiers": self.tiers,
        }

    def suggestion_accuracy(self, tier: str) -> float | None:
        t = self.tiers.get(tier)
        if not t or t["selected"] == 0:
            return None
        return t["suggestion_correct"] / t["selected"]


def resolve_dataset(cfg: ExperimentConfig) -> Dataset:
    if cfg.dataset_path is None:
        return generate_blobs(cfg.blob_classes, cfg.blob_per_class, cfg.blob_dim,
                              cfg.blob_spread, cfg.rng_seed)
    if cfg.dataset_path.endswith(".csv"):
        return import_csv(cfg.dataset_path)
    return load_dataset(cfg.dataset_path)


def _derive_seed(*parts) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def split_run(ds: Dataset, cfg: ExperimentConfig, run: int):
    """Per-run test holdout plus labeled seed / unlabeled pools."""
    rng = np.random.default_rng(_derive_seed(cfg.rng_seed, run, 0xD0))
    perm = rng.permutation(ds.n)
    n_test = int(round(cfg.test_fraction * ds.n))
    if not 0 < cfg.seed_size < ds.n - n_test:
        raise InvalidArgumentError("seed_size incompatible with dataset/test split")
    test_idx = perm[:n_test]
    seed_idx = perm[n_test:n_test + cfg.seed_size]
    pool = PoolState(
        labeled_indices=seed_idx,
        labeled_labels=ds.labels[seed_idx],
        unlabeled_indices=perm[n_test + cfg.seed_size:],
        dataset_ref=ds.name,
    )
    return pool, test_idx


def _split_quota(quota: ClassQuota, num_parts: int) -> list[dict]:
    """Split each class quota across partitions, remainder to the first chunks."""
    parts = [dict() for _ in range(num_parts)]
    for c, k in quota.per_class.items():
        base, rem = divmod(k, num_parts)
        for i in range(num_parts):
            parts[i][c] = base + (1 if i < rem else 0)
    return parts


def select_round(pool: PoolState, ds: Dataset, m: ModelParams,
                 cfg: ExperimentConfig, round_seed: int) -> SelectionBatch:
    """Run the three selection stages for one round; later stages exclude
    earlier picks so the combined batch is disjoint.

    Baseline methods spend the whole budget b1+b2+b3 on the hard tier.
    """
    if cfg.method == "clarifier":
        b1, b2, b3 = cfg.b1, cfg.b2, cfg.b3
    else:
        b1, b2, b3 = cfg.b1 + cfg.b2 + cfg.b3, 0, 0
    total = b1 + b2 + b3
    if total > len(pool.unlabeled_indices):
        raise BudgetExhaustedError(
            f"budget {total} exceeds unlabeled pool of {len(pool.unlabeled_indices)}"
        )
    probs = predict_proba(m, ds.features)
    items: list[SelectionItem] = []

    if b1 > 0:
        num_parts = max(1, min(cfg.num_partitions, len(pool.unlabeled_indices), b1))
        part = partition_unlabeled(pool.unlabeled_indices, num_parts, b1,
                                   _derive_seed(round_seed, 0xA1))
        embeddings = None
        if cfg.al_strategy == "badge":
            embeddings = grad_embeddings(m, ds.features)
        for i, (chunk, budget) in enumerate(zip(part.chunks, part.per_chunk_budget)):
            if budget == 0:
                continue
            if cfg.al_strategy == "entropy":
                batch = entropy_select(probs, chunk, budget)
            else:
                batch = badge_select(embeddings, chunk, probs, budget,
                                     _derive_seed(round_seed, 0xA2, i))
            items.extend(batch.items)

    if b2 > 0:
        taken = {it.index for it in items}
        candidates = np.array([i for i in pool.unlabeled_indices if i not in taken],
                              dtype=np.int64)
        quota = compute_quotas(pool, ds.num_classes, min(b2, len(candidates)))
        num_parts = max(1, min(cfg.num_partitions, len(candidates)))
        part = partition_unlabeled(candidates, num_parts, min(b2, len(candidates)),
                                   _derive_seed(round_seed, 0xB1))
        for chunk, sub_quota in zip(part.chunks, _split_quota(quota, num_parts)):
            sub_b2 = min(sum(sub_quota.values()), len(chunk))
            if sub_b2 == 0:
                continue
            batch = smi_suggest(pool, ds, m, sub_b2, lam=cfg.smi_lambda,
                                candidates=chunk, quota=ClassQuota(sub_quota))
            items.extend(batch.items)

    if b3 > 0:
        taken = {it.index for it in items}
        remaining = np.array([i for i in pool.unlabeled_indices if i not in taken],
                             dtype=np.int64)
        batch = auto_label_select(probs, remaining, min(b3, len(remaining)))
        easy = batch.items
        if cfg.auto_label_threshold is not None:
            easy = [it for it in easy if it.score >= cfg.auto_label_threshold]
        items.extend(easy)

    return SelectionBatch(items=items)


def run_round(pool: PoolState, ds: Dataset, m: ModelParams,
              cfg: ExperimentConfig, run: int, round_index: int,
              cost_so_far: float):
    """One full loop iteration: select, annotate, update pools, retrain."""
    t0 = time.perf_counter()
    round_seed = _derive_seed(cfg.rng_seed, run, round_index, 0x5E)
    selection = select_round(pool, ds, m, cfg, round_seed)

    oracle_cfg = ann.OracleConfig(
        mode=cfg.oracle_mode, epsilon=cfg.oracle_epsilon, c_a=cfg.c_a, c_v=cfg.c_v,
        timing_noise=cfg.timing_noise,
    )
    oracle_rng = np.random.default_rng(_derive_seed(round_seed, 0x0C))

    tiers = {t: {"selected": 0, "suggestion_correct": 0}
             for t in (TIER_HARD, TIER_INTERMEDIATE, TIER_EASY)}
    records = []
    new_idx, new_labels = [], []
    for it in selection.items:
        truth = int(ds.labels[it.index])
        tiers[it.tier]["selected"] += 1
        if it.suggested_label == truth:
            tiers[it.tier]["suggestion_correct"] += 1
        if it.tier == TIER_EASY:
            # auto-labeled: the suggestion is final, no annotator, zero cost
            new_idx.append(it.index)
            new_labels.append(it.suggested_label)
        else:
            rec = ann.oracle_annotate(it.index, it.suggested_label, truth,
                                      oracle_cfg, oracle_rng, ds.num_classes)
            records.append(rec)
            new_idx.append(it.index)
            new_labels.append(rec.final_label)

    if cfg.method == "al_plain":
        # suggestions exist but are not shown; every annotation is from scratch
        cost_round = cfg.c_a * len(records)
    else:
        cost_round = ann.labeling_cost(records, cfg.c_a, cfg.c_v)

    pool = pool.with_new_labels(np.array(new_idx, dtype=np.int64),
                                np.array(new_labels, dtype=np.int64))
    train_cfg = dataclasses.replace(
        cfg.train, rng_seed=_derive_seed(cfg.rng_seed, run, round_index, 0x7A))
    frozen = None
    if cfg.freeze_hidden_after_round0 and cfg.train.arch == "mlp" and m.arch == "mlp":
        frozen = (m.hidden_w, m.hidden_b)
    m = train(pool, ds, train_cfg, frozen_hidden=frozen)
    record = RoundRecord(
        round=round_index,
        test_accuracy=0.0,  # filled by the caller, which owns the test split
        cost_round=cost_round,
        cost_cumulative=cost_so_far + cost_round,
        tiers=tiers,
        wall_time=time.perf_counter() - t0,
    )
    return pool, m, record, records


def _write_results(path: str, cfg: ExperimentConfig, round_records, truncated):
    doc = {
        "config": dataclasses.asdict(cfg),
        "rounds": [r.to_json_dict() for r in round_records],
    }
    if truncated:
        doc["truncated"] = True
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    os.replace(tmp, path)


def run_experiment(cfg: ExperimentConfig, out_dir: str | None = None):
    """Execute all runs; returns a list of per-run RoundRecord lists.

    When ``out_dir`` is given, one JSON results document is (re)written per run
    after every round, so a crash loses at most the round in flight.
    """
    ds = resolve_dataset(cfg)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    all_runs = []
    for run in range(cfg.runs):
        pool, test_idx = split_run(ds, cfg, run)
        seed_cfg = dataclasses.replace(
            cfg.train, rng_seed=_derive_seed(cfg.rng_seed, run, 0x7A))
        m = train(pool, ds, seed_cfg)
        # Round 0 evaluates the seed model; seed labels carry no suggestions,
        # so they are charged at the from-scratch rate.
        seed_cost = cfg.c_a * cfg.seed_size
        records = [RoundRecord(
            round=0,
            test_accuracy=accuracy(m, ds, test_idx),
            cost_round=seed_cost,
            cost_cumulative=seed_cost,
            tiers={t: {"selected": 0, "suggestion_correct": 0}
                   for t in (TIER_HARD, TIER_INTERMEDIATE, TIER_EASY)},
        )]
        out_path = os.path.join(out_dir, f"results_run{run}.json") if out_dir else None
        truncated = False
        if out_path:
            _write_results(out_path, cfg, records, truncated)
        for r in range(1, cfg.rounds + 1):
            try:
                pool, m, rec, _ = run_round(pool, ds, m, cfg, run, r,
                                            records[-1].cost_cumulative)
            except BudgetExhaustedError:
                truncated = True
                break
            rec.test_accuracy = accuracy(m, ds, test_idx)
            records.append(rec)
            if out_path:
                _write_results(out_path, cfg, records, truncated)
        if out_path and truncated:
            _write_results(out_path, cfg, records, truncated)
        all_runs.append(records)
    return all_runs


def cost_accuracy_curve(records) -> list:
    return [(r.cost_cumulative, r.test_accuracy) for r in records]
