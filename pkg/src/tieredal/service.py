"""HTTP session service for live human labeling.

Each session runs the selection loop with the human as the annotator: the UI
fetches pending items one at a time (with suggested labels), submits final
labels, and the server times each decision. Sessions are persisted as
append-only JSONL event logs and are rebuilt deterministically on restart by
replaying the submitted labels.
"""

from __future__ import annotations

import dataclasses
import json
import os
import threading
import time
import uuid

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import annotate as ann
from .data import Dataset
from .errors import BudgetExhaustedError
from .model import TrainConfig, accuracy, train
from .orchestrate import ExperimentConfig, RoundRecord, _derive_seed, \
    select_round, split_run
from .select import TIER_EASY, TIER_HARD, TIER_INTERMEDIATE

PHASE_SELECTING = "selecting"
PHASE_AWAITING = "awaiting_labels"
PHASE_TRAINING = "training"
PHASE_DONE = "done"

_SESSION_CFG_KEYS = (
    "seed_size", "b1", "b2", "b3", "rounds", "method", "al_strategy",
    "num_partitions", "c_a", "c_v", "rng_seed", "test_fraction", "smi_lambda",
)


class SessionCreateBody(BaseModel):
    config: dict = {}


class LabelBody(BaseModel):
    item_token: str
    final_label: int
    client_elapsed_ms: int = 0


def _empty_tiers():
    return {t: {"selected": 0, "suggestion_correct": 0}
            for t in (TIER_HARD, TIER_INTERMEDIATE, TIER_EASY)}


class Session:
    """One live labeling session; all mutations run under ``lock``."""

    def __init__(self, sid: str, ds: Dataset, cfg: ExperimentConfig,
                 class_names, log_path: str, thumbnails=None):
        self.sid = sid
        self.ds = ds
        self.cfg = cfg
        self.class_names = class_names
        self.thumbnails = thumbnails
        self.log_path = log_path
        self.lock = threading.Lock()
        self.phase = PHASE_SELECTING
        self.round_index = 0
        self.records: list[ann.TimingRecord] = []
        self.round_records: list[RoundRecord] = []
        self.completed_tokens: set[str] = set()
        self.queue: list[dict] = []
        self.queue_pos = 0
        self.pending_tiers = _empty_tiers()
        self._round_record_count = 0

        self.pool, self.test_idx = split_run(ds, cfg, run=0)
        seed_cfg = dataclasses.replace(
            cfg.train, rng_seed=_derive_seed(cfg.rng_seed, 0, 0x7A))
        self.model = train(self.pool, ds, seed_cfg)
        self.round_records.append(RoundRecord(
            round=0,
            test_accuracy=accuracy(self.model, ds, self.test_idx),
            cost_round=0.0,
            cost_cumulative=0.0,
            tiers=_empty_tiers(),
        ))
        self._select_next_round()

    def _log(self, event: dict) -> None:
        with open(self.log_path, "a") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    def _select_next_round(self) -> None:
        self.phase = PHASE_SELECTING
        self.round_index += 1
        if self.round_index > self.cfg.rounds:
            self.phase = PHASE_DONE
            return
        round_seed = _derive_seed(self.cfg.rng_seed, 0, self.round_index, 0x5E)
        try:
            selection = select_round(self.pool, self.ds, self.model, self.cfg,
                                     round_seed)
        except BudgetExhaustedError:
            self.phase = PHASE_DONE
            return
        self.pending_tiers = _empty_tiers()
        self._round_record_count = len(self.records)
        easy_idx, easy_labels = [], []
        self.queue = []
        self.queue_pos = 0
        for it in selection.items:
            truth = int(self.ds.labels[it.index])
            self.pending_tiers[it.tier]["selected"] += 1
            if it.suggested_label == truth:
                self.pending_tiers[it.tier]["suggestion_correct"] += 1
            if it.tier == TIER_EASY:
                easy_idx.append(it.index)
                easy_labels.append(it.suggested_label)
            else:
                self.queue.append({
                    "token": f"r{self.round_index}-i{it.index}",
                    "index": it.index,
                    "suggestion": it.suggested_label,
                    "tier": it.tier,
                    "served_at": None,
                })
        if easy_idx:
            self.pool = self.pool.with_new_labels(
                np.array(easy_idx, dtype=np.int64),
                np.array(easy_labels, dtype=np.int64))
        if self.queue:
            self.phase = PHASE_AWAITING
        else:
            self._finish_round()

    def _finish_round(self) -> None:
        self.phase = PHASE_TRAINING
        train_cfg = dataclasses.replace(
            self.cfg.train,
            rng_seed=_derive_seed(self.cfg.rng_seed, 0, self.round_index, 0x7A))
        self.model = train(self.pool, self.ds, train_cfg)
        round_recs = self.records[self._round_record_count:]
        cost_round = ann.labeling_cost(round_recs, self.cfg.c_a, self.cfg.c_v)
        self.round_records.append(RoundRecord(
            round=self.round_index,
            test_accuracy=accuracy(self.model, self.ds, self.test_idx),
            cost_round=cost_round,
            cost_cumulative=self.round_records[-1].cost_cumulative + cost_round,
            tiers=self.pending_tiers,
        ))
        self._select_next_round()

    def next_item(self) -> dict:
        if self.phase == PHASE_TRAINING:
            self._finish_round()
        if self.phase == PHASE_DONE:
            return {"phase": PHASE_DONE}
        if self.phase != PHASE_AWAITING:
            return {"phase": self.phase}
        entry = self.queue[self.queue_pos]
        if entry["served_at"] is None:
            entry["served_at"] = time.monotonic()
        payload = {
            "item_token": entry["token"],
            "item_index": int(entry["index"]),
            "features": [float(v) for v in self.ds.features[entry["index"]]],
            "suggested_label": int(entry["suggestion"]),
            "class_names": self.class_names,
            "tier": entry["tier"],
        }
        if self.thumbnails is not None:
            payload["thumbnail"] = self.thumbnails[entry["index"]]
        return payload

    def submit(self, token: str, final_label: int, client_elapsed_ms: int,
               replay_elapsed: float | None = None) -> dict:
        if token in self.completed_tokens:
            return {"accepted": True}  # idempotent replay
        if self.phase != PHASE_AWAITING:
            raise HTTPException(status_code=409,
                                detail=f"no labels accepted in phase {self.phase}")
        entry = self.queue[self.queue_pos]
        if token != entry["token"]:
            raise HTTPException(status_code=409,
                                detail=f"item {token} is not the pending item")
        if entry["served_at"] is None and replay_elapsed is None:
            raise HTTPException(status_code=409, detail="item was never served")
        elapsed = (replay_elapsed if replay_elapsed is not None
                   else max(time.monotonic() - entry["served_at"], 1e-6))
        truth = int(self.ds.labels[entry["index"]])
        rec = ann.TimingRecord(
            item=int(entry["index"]),
            suggestion_correct=final_label == entry["suggestion"],
            final_label=final_label,
            elapsed=elapsed,
            discarded=final_label != truth,
        )
        self.records.append(rec)
        self.pool = self.pool.with_new_labels(
            np.array([entry["index"]], dtype=np.int64),
            np.array([final_label], dtype=np.int64))
        self.completed_tokens.add(token)
        if replay_elapsed is None:
            self._log({"type": "label", "token": token, "final_label": final_label,
                       "client_elapsed_ms": client_elapsed_ms, "elapsed": elapsed})
        self.queue_pos += 1
        if self.queue_pos >= len(self.queue):
            self.phase = PHASE_TRAINING
        return {"accepted": True}

    def metrics(self) -> dict:
        latest = self.round_records[-1]
        tiers = _empty_tiers()
        for rr in self.round_records:
            for t, counts in rr.tiers.items():
                tiers[t]["selected"] += counts["selected"]
                tiers[t]["suggestion_correct"] += counts["suggestion_correct"]
        for t, counts in self.pending_tiers.items():
            if self.phase in (PHASE_AWAITING,):
                tiers[t]["selected"] += counts["selected"]
                tiers[t]["suggestion_correct"] += counts["suggestion_correct"]
        return {
            "round": latest.round,
            "test_accuracy": latest.test_accuracy,
            "cost_cumulative": ann.labeling_cost(self.records, self.cfg.c_a,
                                                 self.cfg.c_v),
            "tiers": tiers,
            "phase": self.phase,
        }


def _session_config(overrides: dict, base: ExperimentConfig) -> ExperimentConfig:
    fields = {k: overrides[k] for k in _SESSION_CFG_KEYS if k in overrides}
    return dataclasses.replace(base, **fields)


def create_app(ds: Dataset, out_dir: str,
               base_cfg: ExperimentConfig | None = None,
               class_names=None, thumbnails=None) -> FastAPI:
    os.makedirs(out_dir, exist_ok=True)
    if base_cfg is None:
        base_cfg = ExperimentConfig(
            blob_classes=ds.num_classes, seed_size=min(20, ds.n // 4),
            b1=2, b2=2, b3=2, rounds=4,
            train=TrainConfig(t_max=30),
        )
    if class_names is None:
        class_names = [f"class_{c}" for c in range(ds.num_classes)]
    app = FastAPI(title="tieredal labeling service")
    sessions: dict[str, Session] = {}

    def _restore():
        for name in sorted(os.listdir(out_dir)):
            if not name.endswith(".jsonl"):
                continue
            path = os.path.join(out_dir, name)
            sid = name[:-len(".jsonl")]
            created = None
            labels = []
            with open(path) as fh:
                for line in fh:
                    event = json.loads(line)
                    if event["type"] == "created":
                        created = event
                    elif event["type"] == "label":
                        labels.append(event)
            if created is None:
                continue
            cfg = _session_config(created["config"], base_cfg)
            session = Session(sid, ds, cfg, class_names, path, thumbnails)
            for ev in labels:
                session.submit(ev["token"], ev["final_label"],
                               ev.get("client_elapsed_ms", 0),
                               replay_elapsed=ev["elapsed"])
            sessions[sid] = session

    _restore()

    def _get(sid: str) -> Session:
        if sid not in sessions:
            raise HTTPException(status_code=404, detail=f"unknown session {sid}")
        return sessions[sid]

    @app.post("/sessions")
    def create_session(body: SessionCreateBody):
        sid = uuid.uuid4().hex
        cfg = _session_config(body.config, base_cfg)
        path = os.path.join(out_dir, f"{sid}.jsonl")
        session = Session(sid, ds, cfg, class_names, path, thumbnails)
        session._log({"type": "created", "config": body.config})
        sessions[sid] = session
        return {"session_id": sid}

    @app.get("/sessions/{sid}/next")
    def next_item(sid: str):
        session = _get(sid)
        with session.lock:
            return session.next_item()

    @app.post("/sessions/{sid}/labels")
    def submit_label(sid: str, body: LabelBody):
        session = _get(sid)
        with session.lock:
            return session.submit(body.item_token, body.final_label,
                                  body.client_elapsed_ms)

    @app.get("/sessions/{sid}/metrics")
    def metrics(sid: str):
        session = _get(sid)
        with session.lock:
            return session.metrics()

    @app.get("/sessions/{sid}/stats/ratios")
    def ratios(sid: str):
        session = _get(sid)
        with session.lock:
            try:
                stats = ann.ratio_stats(session.records)
            except ann.InsufficientDataError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
        return {
            "mean_cv": stats.mean_cv, "median_cv": stats.median_cv,
            "mean_ca": stats.mean_ca, "median_ca": stats.median_ca,
            "mean_ratio": stats.mean_ratio, "median_ratio": stats.median_ratio,
        }

    return app


def serve(host: str, port: int, args, out_dir: str) -> None:
    """Blocking entry point used by the CLI ``serve`` subcommand."""
    import uvicorn

    from .orchestrate import resolve_dataset

    cfg = ExperimentConfig(
        dataset_path=None if args.dataset == "blobs" else args.dataset,
        blob_classes=args.blob_classes, blob_per_class=args.blob_per_class,
        blob_dim=args.blob_dim, blob_spread=args.blob_spread,
        seed_size=10, b1=2, b2=2, b3=2, rounds=4,
        train=TrainConfig(t_max=30),
    )
    ds = resolve_dataset(cfg)
    app = create_app(ds, out_dir, base_cfg=cfg)
    uvicorn.run(app, host=host, port=port, log_level="warning")
