"""Hard-tier selectors (entropy, k-means++ over gradient embeddings) and the
easy-tier highest-confidence auto-labeler.

Suggested labels for the hard tier are always the model argmax; that is the
SUGGEST baseline folded into selection, so "without suggestions" is purely a
cost-accounting mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

TIER_HARD = "hard"
TIER_INTERMEDIATE = "intermediate"
TIER_EASY = "easy"


@dataclass(frozen=True)
class SelectionItem:
    index: int
    suggested_label: int
    tier: str
    score: float


@dataclass
class SelectionBatch:
    items: list = field(default_factory=list)
    fallback: bool = False  # set when k-means++ degenerated to uniform sampling

    @property
    def indices(self) -> np.ndarray:
        return np.array([it.index for it in self.items], dtype=np.int64)

    @property
    def suggestions(self) -> np.ndarray:
        return np.array([it.suggested_label for it in self.items], dtype=np.int64)


def entropy(probs: np.ndarray) -> np.ndarray:
    """Shannon entropy per row, natural log, with the 0*log(0)=0 convention."""
    p = np.asarray(probs, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log(p), 0.0)
    return terms.sum(axis=1)


def entropy_select(probs: np.ndarray, unlabeled, b: int) -> SelectionBatch:
    """Top-b unlabeled rows by predictive entropy; ties go to the lower index."""
    unlabeled = np.asarray(unlabeled, dtype=np.int64)
    if b > len(unlabeled) or b < 0:
        raise InvalidArgumentError(f"b must be in [0, {len(unlabeled)}]")
    scores = entropy(probs[unlabeled])
    order = np.lexsort((unlabeled, -scores))[:b]
    suggestions = np.argmax(probs[unlabeled], axis=1)
    return SelectionBatch(items=[
        SelectionItem(int(unlabeled[i]), int(suggestions[i]), TIER_HARD,
                      float(scores[i]))
        for i in order
    ])


def badge_select(embeddings: np.ndarray, unlabeled, probs: np.ndarray, b: int,
                 rng_seed: int) -> SelectionBatch:
    """k-means++ seeding over hypothesized-gradient embeddings.

    First point uniform; each next point sampled proportionally to the squared
    distance to its nearest selected point. When all remaining distance mass is
    zero (duplicate embeddings) the batch falls back to uniform sampling and is
    flagged.
    """
    unlabeled = np.asarray(unlabeled, dtype=np.int64)
    if b > len(unlabeled) or b < 0:
        raise InvalidArgumentError(f"b must be in [0, {len(unlabeled)}]")
    rng = np.random.default_rng(rng_seed)
    E = np.asarray(embeddings, dtype=np.float64)[unlabeled]
    m = len(unlabeled)
    chosen: list[int] = []
    scores: list[float] = []
    fallback = False
    available = np.ones(m, dtype=bool)
    d2 = np.full(m, np.inf)
    while len(chosen) < b:
        if not chosen:
            pick = int(rng.integers(m))
            scores.append(float(np.sum(E[pick] ** 2)))
        else:
            d2 = np.minimum(d2, np.sum((E - E[chosen[-1]]) ** 2, axis=1))
            mass = np.where(available, d2, 0.0)
            total = mass.sum()
            if total <= 0.0:
                fallback = True
                pick = int(rng.choice(np.flatnonzero(available)))
                scores.append(0.0)
            else:
                pick = int(rng.choice(m, p=mass / total))
                scores.append(float(d2[pick]))
        chosen.append(pick)
        available[pick] = False
    suggestions = np.argmax(probs[unlabeled], axis=1)
    return SelectionBatch(
        items=[
            SelectionItem(int(unlabeled[i]), int(suggestions[i]), TIER_HARD, s)
            for i, s in zip(chosen, scores)
        ],
        fallback=fallback,
    )


def auto_label_select(probs: np.ndarray, unlabeled, b3: int) -> SelectionBatch:
    """Top-b3 unlabeled rows by max predicted probability; labels are final."""
    unlabeled = np.asarray(unlabeled, dtype=np.int64)
    if b3 > len(unlabeled) or b3 < 0:
        raise InvalidArgumentError(f"b3 must be in [0, {len(unlabeled)}]")
    conf = np.max(probs[unlabeled], axis=1)
    order = np.lexsort((unlabeled, -conf))[:b3]
    suggestions = np.argmax(probs[unlabeled], axis=1)
    return SelectionBatch(items=[
        SelectionItem(int(unlabeled[i]), int(suggestions[i]), TIER_EASY,
                      float(conf[i]))
        for i in order
    ])
