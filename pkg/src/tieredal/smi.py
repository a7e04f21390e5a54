"""Intermediate-tier selection: per-class greedy maximization of log-det
mutual information between unlabeled gradient embeddings and class-restricted
labeled query sets, with max-marginal deduplication.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .data import Dataset, PoolState
from .errors import DegeneratePoolError, InvalidArgumentError, NumericalDomainError
from .kernels import DEFAULT_LAMBDA, cosine_kernel, regularize, _cholesky
from .model import ModelParams, grad_embeddings
from .select import SelectionBatch, SelectionItem, TIER_INTERMEDIATE


@dataclass
class GreedyTrace:
    """Ordered greedy picks with their realized marginal gains."""

    selected: list = field(default_factory=list)  # positions into candidates
    gains: list = field(default_factory=list)
    query_class: int = -1


@dataclass
class ClassQuota:
    per_class: dict = field(default_factory=dict)  # class -> quota


class LogDetMIGreedy:
    """Stateful greedy maximizer of I(A;Q) over a fixed candidate pool.

    Maintains Cholesky factors of K_A (candidate self-kernel restricted to the
    selection) and of its Schur complement against the query, so each step
    scores every candidate with two triangular solves instead of re-evaluating
    the objective from scratch.
    """

    def __init__(self, candidate_embeddings, query_embeddings,
                 lam: float = DEFAULT_LAMBDA, query_class: int = -1):
        cand = np.atleast_2d(np.asarray(candidate_embeddings, dtype=np.float64))
        query = np.atleast_2d(np.asarray(query_embeddings, dtype=np.float64))
        if len(query) == 0:
            raise InvalidArgumentError("query set must be non-empty")
        self.m = len(cand)
        self.K = regularize(cosine_kernel(cand, cand), lam)
        S_Q = regularize(cosine_kernel(query, query), lam)
        C_kq = cosine_kernel(cand, query)
        Lq = _cholesky(S_Q)
        Y = solve_triangular(Lq, C_kq.T, lower=True)
        # D = K - C S_Q^-1 C^T: the Schur complement over the full pool
        self.D = self.K - Y.T @ Y
        self.trace = GreedyTrace(query_class=query_class)
        self._L_K = np.zeros((0, 0))
        self._L_D = np.zeros((0, 0))

    def _pivots_sq(self, M, L, sel):
        """Squared appended-Cholesky pivot of M[sel+{x}] for every x."""
        W = solve_triangular(L, M[np.ix_(sel, range(self.m))], lower=True)
        return np.diag(M) - np.sum(W**2, axis=0), W

    def gains(self) -> np.ndarray:
        """Marginal gain of every candidate given the current selection.

        Already-selected candidates score -inf.
        """
        sel = self.trace.selected
        if not sel:
            dk = np.diag(self.K).copy()
            dd = np.diag(self.D).copy()
            self._wk = self._wd = None
        else:
            dk, self._wk = self._pivots_sq(self.K, self._L_K, sel)
            dd, self._wd = self._pivots_sq(self.D, self._L_D, sel)
        gains = np.full(self.m, -np.inf)
        valid = (dk > 0) & (dd > 0)
        gains[valid] = np.log(dk[valid]) - np.log(dd[valid])
        gains[sel] = -np.inf
        self._dk, self._dd = dk, dd
        return gains

    def _append(self, L, w_col, pivot_sq):
        k = L.shape[0]
        out = np.zeros((k + 1, k + 1))
        out[:k, :k] = L
        if w_col is not None:
            out[k, :k] = w_col
        out[k, k] = np.sqrt(pivot_sq)
        return out

    def step(self, exclude=()) -> tuple[int, float]:
        """Greedily add one candidate, skipping ``exclude``; returns (pos, gain)."""
        gains = self.gains()
        for pos in exclude:
            gains[pos] = -np.inf
        if not np.any(np.isfinite(gains)):
            raise NumericalDomainError(
                "no candidate keeps the kernels positive definite; increase lambda"
            )
        best = int(np.argmax(gains))  # argmax takes the first max: lower index wins
        self._L_K = self._append(
            self._L_K, None if self._wk is None else self._wk[:, best], self._dk[best]
        )
        self._L_D = self._append(
            self._L_D, None if self._wd is None else self._wd[:, best], self._dd[best]
        )
        self.trace.selected.append(best)
        self.trace.gains.append(float(gains[best]))
        return best, float(gains[best])


def greedy_maximize(candidate_embeddings, query_embeddings, k: int,
                    lam: float = DEFAULT_LAMBDA) -> GreedyTrace:
    """Greedy cardinality-constrained maximization of I(A;Q); ties -> lower index."""
    greedy = LogDetMIGreedy(candidate_embeddings, query_embeddings, lam)
    if k > greedy.m or k < 0:
        raise InvalidArgumentError(f"k must be in [0, {greedy.m}]")
    for _ in range(k):
        greedy.step()
    return greedy.trace


def compute_quotas(pool: PoolState, num_classes: int, b2: int) -> ClassQuota:
    """Split b2 over classes with labeled examples.

    Base quota floor(b2 / C'); the remainder goes one each to the classes with
    the fewest labeled examples (ties to the lower class index). Classes with
    no labeled examples get quota 0.
    """
    if b2 < 0:
        raise InvalidArgumentError("b2 must be non-negative")
    counts = {c: len(pool.labels_of_class(c)) for c in range(num_classes)}
    nonempty = [c for c in range(num_classes) if counts[c] > 0]
    if not nonempty:
        raise DegeneratePoolError("no class has labeled examples")
    base, rem = divmod(b2, len(nonempty))
    quotas = {c: (base if c in nonempty else 0) for c in range(num_classes)}
    for c in sorted(nonempty, key=lambda c: (counts[c], c))[:rem]:
        quotas[c] += 1
    return ClassQuota(per_class=quotas)


def max_marginal_dedup(candidates: dict) -> dict:
    """Resolve multiply-selected items to the class of largest recorded gain.

    ``candidates`` maps index -> list of (class, gain); ties -> lower class.
    """
    out = {}
    for idx, entries in candidates.items():
        if not entries:
            raise InvalidArgumentError(f"empty gain list for index {idx}")
        out[idx] = min(entries, key=lambda e: (-e[1], e[0]))[0]
    return out


def smi_suggest(pool: PoolState, ds: Dataset, m: ModelParams, b2: int,
                lam: float = DEFAULT_LAMBDA, candidates=None,
                quota: ClassQuota | None = None) -> SelectionBatch:
    """Per-class greedy LogDetMI selection with suggested labels.

    Unlabeled candidates are embedded with hypothesized labels; each labeled
    class's query set uses its assigned labels. Items selected by several
    classes keep the class of their largest recorded marginal gain, and shrunk
    classes refill greedily until the batch is back at size b2 (or candidates
    run out).
    """
    if candidates is None:
        candidates = pool.unlabeled_indices
    candidates = np.asarray(candidates, dtype=np.int64)
    if b2 > len(candidates) or b2 < 0:
        raise InvalidArgumentError(f"b2 must be in [0, {len(candidates)}]")
    if b2 == 0:
        return SelectionBatch()
    if quota is None:
        quota = compute_quotas(pool, ds.num_classes, b2)
    G_hat = grad_embeddings(m, ds.features[candidates])

    runs: dict[int, LogDetMIGreedy] = {}
    picks: dict[int, list] = {}  # position -> [(class, gain), ...]
    for c in sorted(quota.per_class):
        k_c = quota.per_class[c]
        if k_c == 0:
            continue
        members = pool.labels_of_class(c)
        G_c = grad_embeddings(m, ds.features[members],
                              np.full(len(members), c, dtype=np.int64))
        greedy = LogDetMIGreedy(G_hat, G_c, lam, query_class=c)
        runs[c] = greedy
        for _ in range(min(k_c, greedy.m)):
            pos, gain = greedy.step()
            picks.setdefault(pos, []).append((c, gain))

    winner = max_marginal_dedup(picks)
    kept: dict[int, tuple[int, float]] = {}  # position -> (class, gain)
    shrunk: dict[int, int] = {}  # class -> lost count
    for pos, entries in picks.items():
        c = winner[pos]
        gain = max(g for cc, g in entries if cc == c)
        kept[pos] = (c, gain)
        for cc, _ in entries:
            if cc != c:
                shrunk[cc] = shrunk.get(cc, 0) + 1

    # Refill shrunk classes one step at a time, round-robin by class index.
    while len(kept) < b2:
        progressed = False
        for c in sorted(shrunk):
            if shrunk[c] == 0 or len(kept) >= b2:
                continue
            greedy = runs[c]
            exclude = [p for p in kept if p not in greedy.trace.selected]
            if len(greedy.trace.selected) + len(exclude) >= greedy.m:
                shrunk[c] = 0
                continue
            try:
                pos, gain = greedy.step(exclude=exclude)
            except NumericalDomainError:
                shrunk[c] = 0
                continue
            kept[pos] = (c, gain)
            shrunk[c] -= 1
            progressed = True
        if not progressed:
            break

    items = [
        SelectionItem(int(candidates[pos]), int(c), TIER_INTERMEDIATE, gain)
        for pos, (c, gain) in sorted(kept.items())
    ]
    return SelectionBatch(items=items)
