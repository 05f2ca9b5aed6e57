"""Truncated SVD of unfolded operators and the UASE / ULSE embeddings built on it."""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import DynamicGraph
from .operators import DEFAULT_TAU, UnfoldedOperator, Variant, unfold

GAP_TOL = 1e-10
MIN_SIGMA = 1e-12


class NumericError(RuntimeError):
    pass


class DegenerateWindowWarning(UserWarning):
    """Selected singular values are not separated from the discarded ones."""


class Method(str, enum.Enum):
    UASE = "uase"
    ULSE_N1 = "ulse-n1"
    ULSE_N2 = "ulse-n2"
    CONTEXT_AWARE = "context-aware"


@dataclass(frozen=True)
class Selection:
    """Which singular triplets to keep.

    ``top(d)`` keeps the ``d`` largest in descending order; ``bottom(skip, take)``
    drops the ``skip`` smallest and keeps the next ``take`` in ascending order.
    """

    kind: str
    take: int
    skip: int = 0

    @classmethod
    def top(cls, d: int) -> "Selection":
        return cls("top", d)

    @classmethod
    def bottom(cls, skip: int, take: int) -> "Selection":
        return cls("bottom", take, skip)


@dataclass(frozen=True)
class SvdResult:
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray
    selection: Selection
    warnings: tuple[str, ...] = ()


def default_dimension(method: Method | str, K: int) -> int:
    """``K - 1`` for ULSE-n1, ``K`` otherwise."""
    return K - 1 if Method(method) is Method.ULSE_N1 else K


def _fix_signs(U: np.ndarray) -> np.ndarray:
    # largest |entry| of each column made positive; argmax picks the lowest index on ties
    idx = np.argmax(np.abs(U), axis=0)
    s = np.sign(U[idx, np.arange(U.shape[1])])
    s[s == 0] = 1.0
    return U * s


def svd_unfolded(op: UnfoldedOperator | np.ndarray, selection: Selection) -> SvdResult:
    """Selected singular triplets via the eigendecomposition of ``L L^T``.

    Right vectors are recovered as ``L^T u / sigma``, so every retained singular
    value must exceed ``1e-12``. A gap below ``1e-10`` at either edge of the
    window is reported through :class:`DegenerateWindowWarning` and recorded in
    ``SvdResult.warnings``.
    """
    L = op.matrix if isinstance(op, UnfoldedOperator) else np.asarray(op, dtype=float)
    n = L.shape[0]
    lo = selection.skip
    if selection.take < 1 or lo < 0 or lo + selection.take > n:
        raise ValueError(f"selection {selection} does not fit an operator with {n} rows")
    try:
        evals, evecs = np.linalg.eigh(L @ L.T)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed: {exc}") from exc
    sig = np.sqrt(np.clip(evals, 0.0, None))  # ascending

    if selection.kind == "top":
        idx = np.arange(n - 1, n - 1 - selection.take, -1)
        edges = [(n - selection.take - 1, n - selection.take)] if selection.take < n else []
    elif selection.kind == "bottom":
        idx = np.arange(lo, lo + selection.take)
        edges = []
        if lo > 0:
            edges.append((lo - 1, lo))
        if lo + selection.take < n:
            edges.append((lo + selection.take - 1, lo + selection.take))
    else:
        raise ValueError(f"unknown selection kind {selection.kind!r}")

    notes = []
    for a, b in edges:
        if sig[b] - sig[a] < GAP_TOL:
            msg = (f"singular values {sig[a]:.6g} and {sig[b]:.6g} straddle the selection "
                   f"boundary with gap {sig[b] - sig[a]:.3g}; the retained subspace is not unique")
            notes.append(msg)
            warnings.warn(msg, DegenerateWindowWarning, stacklevel=2)

    s = sig[idx]
    if np.any(s <= MIN_SIGMA):
        raise NumericError(f"retained singular value {s.min():.3g} too small to recover right vectors")
    U = _fix_signs(evecs[:, idx])
    V = (L.T @ U) / s
    return SvdResult(U, s, V, selection, tuple(notes))


def svd_check(L: np.ndarray, res: SvdResult) -> tuple[float, float]:
    """Return (orthonormality error, worst triplet residual relative to ``||L||_2``)."""
    r = res.U.shape[1]
    ortho = max(np.abs(res.U.T @ res.U - np.eye(r)).max(), np.abs(res.V.T @ res.V - np.eye(r)).max())
    resid = np.linalg.norm(L @ res.V - res.U * res.singular_values, axis=0).max()
    return float(ortho), float(resid / max(np.linalg.norm(L, 2), np.finfo(float).tiny))


@dataclass(frozen=True)
class EmbeddingResult:
    method: Method
    anchor: np.ndarray  # (n, d)
    dynamic: tuple[np.ndarray, ...]  # T arrays of shape (n, d)
    singular_values: np.ndarray
    svd: SvdResult | None = field(default=None, repr=False)

    @property
    def d(self) -> int:
        return self.anchor.shape[1]

    @property
    def n(self) -> int:
        return self.anchor.shape[0]

    @property
    def T(self) -> int:
        return len(self.dynamic)

    def stacked(self) -> np.ndarray:
        """Dynamic embeddings stacked into an (n*T, d) array, snapshot-major."""
        return np.vstack(self.dynamic)


def _selection_for(method: Method, d: int) -> Selection:
    return Selection.bottom(1, d) if method is Method.ULSE_N1 else Selection.top(d)


def embed_operator(op: UnfoldedOperator, d: int, check: bool = True) -> EmbeddingResult:
    method = Method(op.variant.value)
    if d < 1:
        raise ValueError("embedding dimension must be >= 1")
    if method is Method.ULSE_N1 and d > op.n - 1:
        raise ValueError(f"ULSE-n1 needs d <= n - 1 = {op.n - 1}")
    res = svd_unfolded(op, _selection_for(method, d))
    if check:
        ortho, resid = svd_check(op.matrix, res)
        if ortho > 1e-10 or resid > 1e-8:
            raise NumericError(f"SVD invariants violated: orthonormality {ortho:.2e}, residual {resid:.2e}")
    root = np.sqrt(res.singular_values)
    anchor = res.U * root
    dynamic = []
    for t in range(op.T):
        Y = res.V[t * op.n:(t + 1) * op.n] * root
        if method is Method.ULSE_N1:
            # V_t S^{1/2} = L_t U S^{-1/2}, so subtracting U S^{-1/2} cancels the identity
            # part of L_t and leaves a function of row i of the snapshot only
            Y = Y - res.U / root
        dynamic.append(Y)
    return EmbeddingResult(method, anchor, tuple(dynamic), res.singular_values, res)


def embed(graph: DynamicGraph | Sequence[np.ndarray], method: Method | str, d: int,
          tau: float = DEFAULT_TAU, check: bool = True) -> EmbeddingResult:
    """UASE, ULSE-n1 or ULSE-n2 embedding of a dynamic graph.

    Parameters
    ----------
    graph : DynamicGraph or sequence of (n, n) arrays
    method : {"uase", "ulse-n1", "ulse-n2"}
    d : int
        Embedding dimension. ULSE-n1 keeps singular values 2..d+1 in ascending
        order; the other two keep the top ``d``.
    tau : float
        Degree regularization added to every degree before normalizing.
    check : bool
        Verify orthonormality and singular-triplet residuals, raising
        :class:`NumericError` on failure.

    Returns
    -------
    EmbeddingResult
        ``anchor = U S^{1/2}``. Dynamic blocks are ``V_t S^{1/2}`` for UASE and
        ULSE-n2, and ``V_t S^{1/2} - U S^{-1/2}`` for ULSE-n1.
    """
    method = Method(method)
    if method is Method.CONTEXT_AWARE:
        from .context import context_aware_embed

        return context_aware_embed(graph, d)
    return embed_operator(unfold(graph, Variant(method.value), tau), d, check=check)


def noise_free_embed(probs: Sequence[np.ndarray], method: Method | str, d: int) -> EmbeddingResult:
    """Run the embedding pipeline on exact edge-probability matrices (no regularization)."""
    probs = [np.asarray(P, dtype=float) for P in probs]
    for t, P in enumerate(probs):
        if not np.array_equal(P, P.T) or P.min() < 0 or P.max() > 1:
            raise ValueError(f"P[{t}] must be symmetric with entries in [0, 1]")
    return embed(probs, method, d, tau=0.0)


def ulse_n1_closed_form(probs: Sequence[np.ndarray], d: int) -> np.ndarray:
    """Noise-free ULSE-n1 dynamic embeddings from the row-wise closed form.

    ``Y_t[i] = -(sum_j P_t[i, j])^{-1/2} P_t[i] D_t^{-1/2} U S^{-1/2}``, with
    ``U, S`` taken from a LAPACK SVD of the unfolded Laplacian, independently of
    :func:`svd_unfolded`. Returns an array of shape (T, n, d). The basis differs
    from the pipeline's by an orthogonal transform, so compare after :func:`align`.
    """
    probs = [np.asarray(P, dtype=float) for P in probs]
    op = unfold(probs, Variant.ULSE_N1, tau=0.0)
    U, s, _ = np.linalg.svd(op.matrix, full_matrices=False)
    order = np.argsort(s)[1:d + 1]
    Us = U[:, order] / np.sqrt(s[order])
    out = []
    for P in probs:
        inv = 1.0 / np.sqrt(P.sum(axis=1))
        out.append(-(inv[:, None] * P * inv[None, :]) @ Us)
    return np.stack(out)


def align(emb_a: np.ndarray, emb_b: np.ndarray) -> tuple[np.ndarray, float]:
    """Orthogonal ``W`` minimizing ``||emb_a W - emb_b||_F`` and the attained residual."""
    emb_a = np.asarray(emb_a, dtype=float)
    emb_b = np.asarray(emb_b, dtype=float)
    if emb_a.shape != emb_b.shape:
        raise ValueError(f"shape mismatch {emb_a.shape} vs {emb_b.shape}")
    u, _, vt = np.linalg.svd(emb_a.T @ emb_b)
    W = u @ vt
    return W, float(np.linalg.norm(emb_a @ W - emb_b))
