"""Softmax classifier (linear head, optional single hidden ReLU layer).

Training follows mini-batch SGD with momentum, weight decay, and a cosine
learning-rate schedule indexed per epoch; parameters are freshly initialized
on every call, never warm-started.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, PoolState
from .errors import DegeneratePoolError, FormatError, InvalidArgumentError

_MODEL_MAGIC = b"TALM"
_MODEL_VERSION = 1


@dataclass
class TrainConfig:
    lr0: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 5e-4
    t_max: int = 100
    stop_train_acc: float = 0.99
    batch_size: int = 32
    rng_seed: int = 0
    arch: str = "linear"  # "linear" or "mlp"
    hidden_dim: int = 0  # required > 0 for mlp

    def __post_init__(self):
        if self.t_max < 1:
            raise InvalidArgumentError("t_max must be >= 1")
        if self.batch_size < 1:
            raise InvalidArgumentError("batch_size must be >= 1")
        if not 0.0 <= self.momentum < 1.0:
            raise InvalidArgumentError("momentum must be in [0, 1)")
        if self.arch not in ("linear", "mlp"):
            raise InvalidArgumentError("arch must be 'linear' or 'mlp'")
        if self.arch == "mlp" and self.hidden_dim < 1:
            raise InvalidArgumentError("mlp arch needs hidden_dim >= 1")


@dataclass
class ModelParams:
    """Classifier parameters; h = input dim for the linear arch."""

    head_w: np.ndarray  # (C, h)
    head_b: np.ndarray  # (C,)
    hidden_w: np.ndarray | None = None  # (h, d)
    hidden_b: np.ndarray | None = None  # (h,)
    arch: str = "linear"
    trained_epochs: int = 0

    @property
    def num_classes(self) -> int:
        return self.head_w.shape[0]

    @property
    def input_dim(self) -> int:
        if self.arch == "mlp":
            return self.hidden_w.shape[1]
        return self.head_w.shape[1]

    @property
    def feature_dim(self) -> int:
        return self.head_w.shape[1]


def _uniform_init(rng, shape, fan_in):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def init_params(dim: int, num_classes: int, cfg: TrainConfig,
                rng: np.random.Generator) -> ModelParams:
    """Seeded uniform +-1/sqrt(fan_in) initialization."""
    if cfg.arch == "mlp":
        h = cfg.hidden_dim
        return ModelParams(
            head_w=_uniform_init(rng, (num_classes, h), h),
            head_b=_uniform_init(rng, (num_classes,), h),
            hidden_w=_uniform_init(rng, (h, dim), dim),
            hidden_b=_uniform_init(rng, (h,), dim),
            arch="mlp",
        )
    return ModelParams(
        head_w=_uniform_init(rng, (num_classes, dim), dim),
        head_b=_uniform_init(rng, (num_classes,), dim),
        arch="linear",
    )


def features(m: ModelParams, X: np.ndarray) -> np.ndarray:
    """Penultimate representation: identity for linear, ReLU activations for mlp."""
    X = np.atleast_2d(np.asarray(X))
    if X.shape[1] != m.input_dim:
        raise InvalidArgumentError(
            f"expected {m.input_dim} input columns, got {X.shape[1]}"
        )
    if m.arch == "linear":
        return X
    return np.maximum(X.astype(np.float64) @ m.hidden_w.T + m.hidden_b, 0.0)


def _logits(m: ModelParams, X: np.ndarray) -> np.ndarray:
    return features(m, X).astype(np.float64) @ m.head_w.T + m.head_b


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def predict_proba(m: ModelParams, X: np.ndarray) -> np.ndarray:
    """Row-stochastic class probabilities (max-subtracted softmax)."""
    return _softmax(_logits(m, X))


def accuracy(m: ModelParams, ds: Dataset, indices) -> float:
    """Fraction of argmax-correct predictions; argmax ties -> lowest class."""
    indices = np.asarray(indices, dtype=np.int64)
    if len(indices) == 0:
        raise InvalidArgumentError("accuracy over an empty index list is undefined")
    pred = np.argmax(_logits(m, ds.features[indices]), axis=1)
    return float(np.mean(pred == ds.labels[indices]))


def grad_embedding(m: ModelParams, x: np.ndarray, label: int | None = None) -> np.ndarray:
    """Last-layer cross-entropy gradient, flattened to length C*h.

    With the label omitted the model's own argmax prediction stands in
    (the hypothesized label). Bias gradients are excluded.
    """
    return grad_embeddings(m, np.atleast_2d(x),
                           None if label is None else np.array([label]))[0]


def grad_embeddings(m: ModelParams, X: np.ndarray,
                    labels: np.ndarray | None = None) -> np.ndarray:
    """Batch version of grad_embedding: (n, C*h) rows outer(p - e_y, phi(x))."""
    X = np.atleast_2d(np.asarray(X))
    phi = features(m, X).astype(np.float64)
    p = _softmax(phi @ m.head_w.T + m.head_b)
    if labels is None:
        y = np.argmax(p, axis=1)
    else:
        y = np.asarray(labels, dtype=np.int64)
        if y.min() < 0 or y.max() >= m.num_classes:
            raise InvalidArgumentError("label out of range")
    delta = p.copy()
    delta[np.arange(len(y)), y] -= 1.0
    return (delta[:, :, None] * phi[:, None, :]).reshape(len(X), -1)


def loss_and_grad(m: ModelParams, X: np.ndarray, y: np.ndarray,
                  weight_decay: float):
    """Training objective (mean cross-entropy + L2 penalty) and its gradient.

    Returns (loss, grads) with grads keyed like the ModelParams arrays.
    The same backward pass drives the trainer, so finite-difference checks on
    this function validate training end to end.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = len(y)
    if m.arch == "mlp":
        pre = X @ m.hidden_w.T + m.hidden_b
        phi = np.maximum(pre, 0.0)
    else:
        phi = X
    logits = phi @ m.head_w.T + m.head_b
    shifted = logits - logits.max(axis=1, keepdims=True)
    logZ = np.log(np.exp(shifted).sum(axis=1))
    ce = float(np.mean(logZ - shifted[np.arange(n), y]))
    p = np.exp(shifted) / np.exp(shifted).sum(axis=1, keepdims=True)
    delta = p
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grads = {
        "head_w": delta.T @ phi + weight_decay * m.head_w,
        "head_b": delta.sum(axis=0) + weight_decay * m.head_b,
    }
    penalty = np.sum(m.head_w**2) + np.sum(m.head_b**2)
    if m.arch == "mlp":
        dphi = delta @ m.head_w
        dpre = dphi * (pre > 0)
        grads["hidden_w"] = dpre.T @ X + weight_decay * m.hidden_w
        grads["hidden_b"] = dpre.sum(axis=0) + weight_decay * m.hidden_b
        penalty += np.sum(m.hidden_w**2) + np.sum(m.hidden_b**2)
    loss = ce + 0.5 * weight_decay * penalty
    return loss, grads


def cosine_lr(lr0: float, epoch: int, t_max: int) -> float:
    return lr0 * 0.5 * (1.0 + np.cos(np.pi * epoch / t_max))


def train(pool: PoolState, ds: Dataset, cfg: TrainConfig,
          frozen_hidden: tuple[np.ndarray, np.ndarray] | None = None) -> ModelParams:
    """Fit a fresh model on the labeled pool.

    ``frozen_hidden`` optionally pins (hidden_w, hidden_b) from an earlier
    round; only the head is then initialized and updated.
    """
    if len(pool.labeled_indices) == 0:
        raise DegeneratePoolError("labeled pool is empty")
    if len(np.unique(pool.labeled_labels)) < 2:
        raise DegeneratePoolError("labeled pool holds a single class")
    X = ds.features[pool.labeled_indices].astype(np.float64)
    y = pool.labeled_labels
    rng = np.random.default_rng(cfg.rng_seed)
    m = init_params(ds.dim, ds.num_classes, cfg, rng)
    trainable = ["head_w", "head_b"]
    if cfg.arch == "mlp":
        if frozen_hidden is not None:
            m.hidden_w = frozen_hidden[0].copy()
            m.hidden_b = frozen_hidden[1].copy()
        else:
            trainable += ["hidden_w", "hidden_b"]
    velocity = {k: np.zeros_like(getattr(m, k)) for k in trainable}
    n = len(y)
    for epoch in range(cfg.t_max):
        lr = cosine_lr(cfg.lr0, epoch, cfg.t_max)
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            _, grads = loss_and_grad(m, X[batch], y[batch], cfg.weight_decay)
            for k in trainable:
                velocity[k] = cfg.momentum * velocity[k] + grads[k]
                setattr(m, k, getattr(m, k) - lr * velocity[k])
        m.trained_epochs = epoch + 1
        train_acc = np.mean(np.argmax(_logits(m, X), axis=1) == y)
        if train_acc >= cfg.stop_train_acc:
            break
    return m


def save_model(m: ModelParams, path: str) -> None:
    """Opaque versioned blob: magic TALM, u32 version, npz payload."""
    arrays = {"head_w": m.head_w, "head_b": m.head_b}
    if m.arch == "mlp":
        arrays["hidden_w"] = m.hidden_w
        arrays["hidden_b"] = m.hidden_b
    buf = io.BytesIO()
    np.savez(buf, **arrays)
    meta = json.dumps({"arch": m.arch, "trained_epochs": m.trained_epochs}).encode()
    with open(path, "wb") as fh:
        fh.write(_MODEL_MAGIC)
        fh.write(struct.pack("<II", _MODEL_VERSION, len(meta)))
        fh.write(meta)
        fh.write(buf.getvalue())


def load_model(path: str) -> ModelParams:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != _MODEL_MAGIC:
        raise FormatError(f"bad magic {raw[:4]!r}", offset=0)
    version, meta_len = struct.unpack("<II", raw[4:12])
    if version != _MODEL_VERSION:
        raise FormatError(f"unsupported model version {version}", offset=4)
    meta = json.loads(raw[12:12 + meta_len].decode())
    arrays = np.load(io.BytesIO(raw[12 + meta_len:]))
    return ModelParams(
        head_w=arrays["head_w"],
        head_b=arrays["head_b"],
        hidden_w=arrays["hidden_w"] if "hidden_w" in arrays else None,
        hidden_b=arrays["hidden_b"] if "hidden_b" in arrays else None,
        arch=meta["arch"],
        trained_epochs=meta["trained_epochs"],
    )
