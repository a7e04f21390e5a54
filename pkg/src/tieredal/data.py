"""Datasets, labeled/unlabeled pools, persistence, and partitioning.

The binary dataset format is little-endian: magic ``TALD``, u32 version (=1),
u32 n, u32 d, u32 num_classes, n*d float32 features (row-major), n u32 labels.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, InvalidArgumentError, ValidationError

_MAGIC = b"TALD"
_VERSION = 1


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with ground-truth labels; the selection universe."""

    features: np.ndarray  # (n, d) float32
    labels: np.ndarray  # (n,) int
    num_classes: int
    name: str = "dataset"

    def __post_init__(self):
        feats = np.ascontiguousarray(self.features, dtype=np.float32)
        labels = np.asarray(self.labels, dtype=np.int64)
        if feats.ndim != 2 or feats.shape[0] < 1 or feats.shape[1] < 1:
            raise InvalidArgumentError("features must be a non-empty 2-D matrix")
        if not np.all(np.isfinite(feats)):
            raise ValidationError("features contain non-finite entries")
        if labels.shape != (feats.shape[0],):
            raise InvalidArgumentError("labels must be one per feature row")
        if self.num_classes < 2:
            raise InvalidArgumentError("num_classes must be >= 2")
        if labels.min() < 0 or labels.max() >= self.num_classes:
            raise ValidationError("labels must lie in [0, num_classes)")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.num_classes == other.num_classes
            and self.name == other.name
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
        )


@dataclass(frozen=True)
class PoolState:
    """Disjoint labeled/unlabeled index sets over one dataset.

    ``labeled_labels[i]`` is the label *assigned* to ``labeled_indices[i]``,
    which may differ from ground truth when the annotator erred.
    """

    labeled_indices: np.ndarray
    labeled_labels: np.ndarray
    unlabeled_indices: np.ndarray
    dataset_ref: str = "dataset"

    def __post_init__(self):
        li = np.asarray(self.labeled_indices, dtype=np.int64)
        ll = np.asarray(self.labeled_labels, dtype=np.int64)
        ui = np.asarray(self.unlabeled_indices, dtype=np.int64)
        if li.shape != ll.shape:
            raise InvalidArgumentError("one label per labeled index required")
        if len(np.intersect1d(li, ui)) > 0:
            raise InvalidArgumentError("labeled and unlabeled indices overlap")
        if len(set(li.tolist())) != len(li) or len(set(ui.tolist())) != len(ui):
            raise InvalidArgumentError("duplicate indices in pool")
        object.__setattr__(self, "labeled_indices", li)
        object.__setattr__(self, "labeled_labels", ll)
        object.__setattr__(self, "unlabeled_indices", ui)

    def with_new_labels(self, indices, labels) -> "PoolState":
        """Move ``indices`` from unlabeled to labeled with assigned labels."""
        indices = np.asarray(indices, dtype=np.int64)
        labels = np.asarray(labels, dtype=np.int64)
        if not np.all(np.isin(indices, self.unlabeled_indices)):
            raise InvalidArgumentError("can only label currently unlabeled indices")
        keep = ~np.isin(self.unlabeled_indices, indices)
        return PoolState(
            labeled_indices=np.concatenate([self.labeled_indices, indices]),
            labeled_labels=np.concatenate([self.labeled_labels, labels]),
            unlabeled_indices=self.unlabeled_indices[keep],
            dataset_ref=self.dataset_ref,
        )

    def labels_of_class(self, c: int) -> np.ndarray:
        """Labeled indices whose assigned label is ``c``."""
        return self.labeled_indices[self.labeled_labels == c]


@dataclass(frozen=True)
class Partitioning:
    """Random equal-size chunks of an index set with split budgets."""

    chunks: list = field(default_factory=list)  # list of int64 arrays
    per_chunk_budget: list = field(default_factory=list)


def generate_blobs(num_classes: int, per_class: int, dim: int, spread: float,
                   rng_seed: int) -> Dataset:
    """Isotropic Gaussian blobs with uniform-hypercube class means.

    Means are i.i.d. uniform in a hypercube of side ``10 * spread``, so class
    overlap varies with the seed; that overlap is what exercises the three
    hardness tiers downstream.
    """
    if num_classes < 2 or per_class < 1 or dim < 1 or spread <= 0:
        raise InvalidArgumentError(
            "need num_classes >= 2, per_class >= 1, dim >= 1, spread > 0"
        )
    rng = np.random.default_rng(rng_seed)
    means = rng.uniform(0.0, 10.0 * spread, size=(num_classes, dim))
    feats = np.empty((num_classes * per_class, dim), dtype=np.float32)
    labels = np.empty(num_classes * per_class, dtype=np.int64)
    for c in range(num_classes):
        block = slice(c * per_class, (c + 1) * per_class)
        feats[block] = (means[c] + spread * rng.standard_normal((per_class, dim))).astype(
            np.float32
        )
        labels[block] = c
    return Dataset(feats, labels, num_classes, name=f"blobs-{rng_seed}")


def save_dataset(ds: Dataset, path: str) -> None:
    """Write ``ds`` in the TALD binary format."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IIII", _VERSION, ds.n, ds.dim, ds.num_classes))
        fh.write(np.ascontiguousarray(ds.features, dtype="<f4").tobytes())
        fh.write(ds.labels.astype("<u4").tobytes())


def load_dataset(path: str) -> Dataset:
    """Read a TALD file; round-trips save_dataset bit-exactly."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4 or raw[:4] != _MAGIC:
        raise FormatError(f"bad magic {raw[:4]!r}, expected {_MAGIC!r}", offset=0)
    if len(raw) < 20:
        raise FormatError("truncated header", offset=len(raw))
    version, n, d, num_classes = struct.unpack("<IIII", raw[4:20])
    if version != _VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    feat_bytes = n * d * 4
    label_bytes = n * 4
    expected = 20 + feat_bytes + label_bytes
    if len(raw) != expected:
        raise FormatError(
            f"body length {len(raw) - 20} does not match header (n={n}, d={d})",
            offset=min(len(raw), expected),
        )
    feats = np.frombuffer(raw, dtype="<f4", count=n * d, offset=20).reshape(n, d)
    labels = np.frombuffer(raw, dtype="<u4", count=n, offset=20 + feat_bytes)
    if labels.max(initial=0) >= num_classes:
        raise ValidationError("file contains a label >= num_classes")
    return Dataset(feats.copy(), labels.astype(np.int64), num_classes)


def import_csv(path: str, num_classes: int | None = None) -> Dataset:
    """CSV convenience: one row per point, last column is the integer label."""
    table = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    feats = table[:, :-1].astype(np.float32)
    labels = table[:, -1]
    if not np.all(labels == np.round(labels)):
        raise ValidationError("last CSV column must hold integer labels")
    labels = labels.astype(np.int64)
    if num_classes is None:
        num_classes = int(labels.max()) + 1
    return Dataset(feats, labels, num_classes)


def split_pools(ds: Dataset, seed_size: int, rng_seed: int) -> PoolState:
    """Uniform seed split: seed items keep their ground-truth labels."""
    if not 0 < seed_size < ds.n:
        raise InvalidArgumentError(f"seed_size must be in (0, {ds.n})")
    rng = np.random.default_rng(rng_seed)
    perm = rng.permutation(ds.n)
    seed_idx = perm[:seed_size]
    return PoolState(
        labeled_indices=seed_idx,
        labeled_labels=ds.labels[seed_idx],
        unlabeled_indices=perm[seed_size:],
        dataset_ref=ds.name,
    )


def partition_unlabeled(indices, num_partitions: int, total_budget: int,
                        rng_seed: int) -> Partitioning:
    """Shuffle and chunk; budget = floor split, remainder to the first chunks."""
    indices = np.asarray(indices, dtype=np.int64)
    if num_partitions < 1 or num_partitions > len(indices):
        raise InvalidArgumentError(
            f"num_partitions must be in [1, {len(indices)}]"
        )
    if total_budget > len(indices) or total_budget < 0:
        raise InvalidArgumentError("total_budget must be in [0, len(indices)]")
    rng = np.random.default_rng(rng_seed)
    shuffled = rng.permutation(indices)
    chunks = [np.asarray(c) for c in np.array_split(shuffled, num_partitions)]
    base, rem = divmod(total_budget, num_partitions)
    # Budget remainder goes to the first chunks in shuffled order; array_split
    # also puts the larger chunks first, so budget_i <= |chunk_i| always holds.
    budgets = [base + (1 if i < rem else 0) for i in range(num_partitions)]
    return Partitioning(chunks=chunks, per_chunk_budget=budgets)
