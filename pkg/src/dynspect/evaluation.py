"""K-means clustering, clustering metrics and stability reports."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .spectral import EmbeddingResult


# --------------------------------------------------------------------------- k-means

@dataclass(frozen=True)
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    cost: float
    n_iter: int
    repairs: int
    cost_history: tuple[float, ...] = field(repr=False)


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    d = (X * X).sum(1)[:, None] - 2.0 * X @ C.T + (C * C).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _plus_plus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    m = X.shape[0]
    centers = [X[rng.integers(m)]]
    closest = _sq_dists(X, centers[0][None, :])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            i = rng.choice(m, p=closest / total)
        else:
            i = rng.integers(m)
        centers.append(X[i])
        closest = np.minimum(closest, _sq_dists(X, X[i][None, :])[:, 0])
    return np.array(centers)


def _lloyd(X: np.ndarray, centers: np.ndarray, max_iter: int) -> KMeansResult:
    k = centers.shape[0]
    history = []
    repairs = 0
    labels = None
    for it in range(1, max_iter + 1):
        D = _sq_dists(X, centers)
        new_labels = D.argmin(axis=1)
        cost = float(D[np.arange(len(X)), new_labels].sum())
        if history:
            # each step (centroid update or empty-cluster repair) cannot raise the cost
            assert cost <= history[-1] * (1 + 1e-12) + 1e-12, "k-means cost increased"
        history.append(cost)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, X)
        for j in range(k):
            if counts[j]:
                centers[j] = sums[j] / counts[j]
        own = D[np.arange(len(X)), labels]
        taken = set()
        for j in np.flatnonzero(counts == 0):
            order = np.argsort(-own, kind="stable")
            far = next(i for i in order if i not in taken)
            taken.add(far)
            centers[j] = X[far]
            own[far] = 0.0
            repairs += 1
    D = _sq_dists(X, centers)
    labels = D.argmin(axis=1)
    cost = float(D[np.arange(len(X)), labels].sum())
    return KMeansResult(labels, centers, cost, it, repairs, tuple(history))


def kmeans_fit(points: np.ndarray, k: int, seed: int = 0, restarts: int = 10,
               max_iter: int = 300) -> KMeansResult:
    """Lloyd's algorithm from k-means++ seeds; best of ``restarts`` by within-cluster SS.

    Empty clusters are re-seeded at the point farthest from its current centre.
    Ties between restarts go to the lowest restart index.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    m = X.shape[0]
    if not 1 <= k <= m:
        raise ValueError(f"need 1 <= k <= number of points, got k={k}, m={m}")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, restarts)):
        res = _lloyd(X, _plus_plus(X, k, rng), max_iter)
        if best is None or res.cost < best.cost:
            best = res
    return best


def kmeans(points: np.ndarray, k: int, seed: int = 0, restarts: int = 10) -> np.ndarray:
    return kmeans_fit(points, k, seed, restarts).labels


# --------------------------------------------------------------------------- metrics

def _as_labels(x) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 1:
        raise ValueError("labels must be one-dimensional")
    return x


def _contingency(truth, pred) -> np.ndarray:
    _, ti = np.unique(truth, return_inverse=True)
    _, pi = np.unique(pred, return_inverse=True)
    C = np.zeros((ti.max() + 1, pi.max() + 1))
    np.add.at(C, (ti, pi), 1)
    return C


def _matched(truth, pred, k: int) -> tuple[np.ndarray, np.ndarray]:
    truth, pred = _as_labels(truth), _as_labels(pred)
    if truth.shape != pred.shape:
        raise ValueError("truth and pred differ in length")
    for name, lab in (("truth", truth), ("pred", pred)):
        if lab.size and (lab.min() < 0 or lab.max() >= k):
            raise ValueError(f"{name} labels must lie in [0, {k})")
    C = np.zeros((k, k))
    np.add.at(C, (truth, pred), 1)
    # agreements first; ties between matchings broken by summed per-class F1, which
    # keeps F1 independent of how the predicted labels happen to be numbered
    sizes = C.sum(1)[:, None] + C.sum(0)[None, :]
    f1 = np.divide(2.0 * C, sizes, out=np.zeros_like(C), where=sizes > 0)
    rows, cols = linear_sum_assignment(C + f1 / (k + 1), maximize=True)
    mapping = np.empty(k, dtype=int)
    mapping[cols] = rows
    return C, mapping


def accuracy(truth, pred, k: int) -> float:
    """Best agreement fraction over label bijections (Hungarian matching)."""
    C, mapping = _matched(truth, pred, k)
    return float(C[mapping, np.arange(k)].sum() / max(C.sum(), 1))


def f1_macro(truth, pred, k: int) -> float:
    """Macro F1 after the same matching as :func:`accuracy`.

    Averages over classes occurring in the truth or in the matched prediction.
    """
    truth = _as_labels(truth)
    _, mapping = _matched(truth, pred, k)
    mapped = mapping[_as_labels(pred)]
    scores = []
    for c in np.union1d(truth, mapped):
        tp = np.sum((truth == c) & (mapped == c))
        denom = np.sum(truth == c) + np.sum(mapped == c)
        scores.append(2.0 * tp / denom if denom else 0.0)
    return float(np.mean(scores))


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(truth, pred) -> float:
    """Mutual information normalized by the arithmetic mean of the two entropies.

    If either labeling has zero entropy the score is 1 when both partitions are
    identical and 0 otherwise.
    """
    C = _contingency(_as_labels(truth), _as_labels(pred))
    h_t, h_p = _entropy(C.sum(1)), _entropy(C.sum(0))
    if h_t == 0 or h_p == 0:
        return 1.0 if h_t == h_p else 0.0
    N = C.sum()
    P = C / N
    outer = np.outer(P.sum(1), P.sum(0))
    nz = P > 0
    mi = float((P[nz] * np.log(P[nz] / outer[nz])).sum())
    return float(min(max(mi / ((h_t + h_p) / 2.0), 0.0), 1.0))


def ari(truth, pred) -> float:
    """Adjusted Rand index; 1.0 when the chance-corrected denominator vanishes."""
    C = _contingency(_as_labels(truth), _as_labels(pred))

    def comb2(x):
        return (x * (x - 1) / 2.0).sum()

    index = comb2(C)
    a, b = comb2(C.sum(1)), comb2(C.sum(0))
    total = comb2(np.array([C.sum()]))
    expected = a * b / total if total else 0.0
    max_index = (a + b) / 2.0
    if max_index == expected:
        return 1.0
    return float((index - expected) / (max_index - expected))


@dataclass
class ClusteringMetrics:
    acc: float
    nmi: float
    ari: float
    f1: float
    per_snapshot: list[dict] | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def score(truth, pred, k: int | None = None) -> ClusteringMetrics:
    truth = np.unique(truth, return_inverse=True)[1]
    pred = np.unique(pred, return_inverse=True)[1]
    k = max(truth.max(), pred.max()) + 1 if k is None else k
    return ClusteringMetrics(accuracy(truth, pred, k), nmi(truth, pred), ari(truth, pred),
                             f1_macro(truth, pred, k))


def cluster_embedding(emb: EmbeddingResult, truths: Sequence[np.ndarray], seed: int = 0,
                      restarts: int = 10, mode: str = "average") -> ClusteringMetrics:
    """K-means on the dynamic embeddings scored against per-snapshot truth.

    ``mode="average"`` clusters each snapshot separately with as many clusters
    as distinct truth labels in that snapshot and averages the metrics over
    snapshots. ``mode="pooled"`` clusters all (node, t) rows at once; the truth
    ids must then be shared across snapshots.
    """
    if len(truths) != emb.T:
        raise ValueError(f"{len(truths)} truth vectors for {emb.T} snapshots")
    if mode == "average":
        per = []
        for t, (Y, z) in enumerate(zip(emb.dynamic, truths)):
            k = len(np.unique(z))
            pred = kmeans(Y, k, seed=seed + t, restarts=restarts)
            per.append(score(z, pred).to_dict())
        mean = {key: float(np.mean([p[key] for p in per])) for key in ("acc", "nmi", "ari", "f1")}
        for p in per:
            p.pop("per_snapshot")
        return ClusteringMetrics(**mean, per_snapshot=per)
    if mode == "pooled":
        z = np.concatenate(truths)
        pred = kmeans(emb.stacked(), len(np.unique(z)), seed=seed, restarts=restarts)
        return score(z, pred)
    raise ValueError(f"unknown aggregation mode {mode!r}")


# --------------------------------------------------------------------------- stability

@dataclass
class StabilityReport:
    cross_sectional_max: float
    longitudinal_max: float
    cross_sectional_rel_max: float
    longitudinal_rel_max: float
    n_cross_pairs: int
    n_longitudinal_triples: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def equal_row_pairs(probs: Sequence[np.ndarray]) -> np.ndarray:
    """All ``(i, j, t)`` with ``i < j`` whose rows of ``P_t`` coincide exactly."""
    out = []
    for t, P in enumerate(probs):
        _, inv = np.unique(np.asarray(P), axis=0, return_inverse=True)
        inv = inv.ravel()
        i, j = np.triu_indices(len(inv), k=1)
        keep = inv[i] == inv[j]
        out.append(np.column_stack([i[keep], j[keep], np.full(keep.sum(), t)]))
    return np.vstack(out) if out else np.empty((0, 3), dtype=int)


def equal_time_triples(probs: Sequence[np.ndarray], require_equal_degrees: bool = False) -> np.ndarray:
    """All ``(i, t, u)`` with ``t < u`` where row ``i`` of ``P_t`` and ``P_u`` coincide.

    With ``require_equal_degrees`` only snapshot pairs whose full degree vectors
    agree contribute.
    """
    out = []
    T = len(probs)
    for t in range(T):
        for u in range(t + 1, T):
            Pt, Pu = np.asarray(probs[t]), np.asarray(probs[u])
            if require_equal_degrees and not np.array_equal(Pt.sum(1), Pu.sum(1)):
                continue
            rows = np.flatnonzero(np.all(Pt == Pu, axis=1))
            out.append(np.column_stack([rows, np.full(rows.size, t), np.full(rows.size, u)]))
    return np.vstack(out).astype(int) if out else np.empty((0, 3), dtype=int)


def stability_report(emb: EmbeddingResult, cross_pairs=(), longitudinal=()) -> StabilityReport:
    """Largest row distances over the declared equal-behaviour hypotheses.

    ``cross_pairs`` holds ``(i, j, t)`` and ``longitudinal`` holds ``(i, t, u)``.
    Relative maxima divide by the Frobenius norm of the snapshot involved (the
    larger of the two for longitudinal triples). No alignment is applied.
    """
    Y = np.stack(emb.dynamic)
    norms = np.linalg.norm(Y, axis=(1, 2))
    cross = np.asarray(cross_pairs, dtype=int).reshape(-1, 3)
    lon = np.asarray(longitudinal, dtype=int).reshape(-1, 3)
    cs = np.linalg.norm(Y[cross[:, 2], cross[:, 0]] - Y[cross[:, 2], cross[:, 1]], axis=1)
    ls = np.linalg.norm(Y[lon[:, 1], lon[:, 0]] - Y[lon[:, 2], lon[:, 0]], axis=1)
    cs_rel = cs / np.maximum(norms[cross[:, 2]], np.finfo(float).tiny)
    ls_rel = ls / np.maximum(np.maximum(norms[lon[:, 1]], norms[lon[:, 2]]), np.finfo(float).tiny)

    def mx(a):
        return float(a.max()) if a.size else 0.0

    return StabilityReport(mx(cs), mx(ls), mx(cs_rel), mx(ls_rel), len(cross), len(lon))
