"""Context-aware perturbation embedding baseline.

Every snapshot Laplacian is treated as a first-order perturbation of the
Laplacian of the edge-averaged context graph. Kept here to exhibit its lack of
injectivity: distinct snapshots can share perturbed eigenvalues.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import DynamicGraph
from .operators import laplacian_n1
from .spectral import EmbeddingResult, Method, _fix_signs

DEGENERACY_TOL = 1e-10


class DegenerateSpectrumError(ValueError):
    pass


@dataclass(frozen=True)
class ContextPerturbation:
    context_laplacian: np.ndarray
    context_eigenvalues: np.ndarray  # (n,) ascending
    context_vectors: np.ndarray  # (n, n), columns
    projections: np.ndarray  # (T, n, n): u_j^T dL_t u_i
    eigenvalue_shifts: np.ndarray  # (T, n)
    eigenvalues: np.ndarray  # (T, n)
    vectors: np.ndarray  # (T, n, n), perturbed eigenvectors as columns


def context_perturbation(graph: DynamicGraph | Sequence[np.ndarray], k: int | None = None,
                         tau: float = 0.0) -> ContextPerturbation:
    mats = list(graph.snapshots) if isinstance(graph, DynamicGraph) else [np.asarray(M, float) for M in graph]
    n = mats[0].shape[0]
    k = n if k is None else k
    context = sum(mats) / len(mats)
    Lc = laplacian_n1(context, tau)
    lam, Uc = np.linalg.eigh(Lc)
    Uc = _fix_signs(Uc)

    diff = lam[:, None] - lam[None, :]
    np.fill_diagonal(diff, np.inf)
    if np.abs(diff[:k]).min() < DEGENERACY_TOL:
        raise DegenerateSpectrumError("repeated context eigenvalues; first-order eigenvector update undefined")

    proj, shifts, vecs = [], [], []
    for A in mats:
        dL = laplacian_n1(A, tau) - Lc
        M = Uc.T @ dL @ Uc  # M[j, i] = u_j^T dL u_i
        with np.errstate(divide="ignore", invalid="ignore"):
            coef = M / diff.T  # coef[j, i] = M[j, i] / (lam_i - lam_j)
        np.fill_diagonal(coef, 0.0)
        proj.append(M)
        shifts.append(np.diag(M).copy())
        vecs.append(Uc + Uc @ coef)
    shifts = np.array(shifts)
    return ContextPerturbation(Lc, lam, Uc, np.array(proj), shifts, lam + shifts, np.array(vecs))


def context_aware_embed(graph: DynamicGraph | Sequence[np.ndarray], k: int,
                        tau: float = 0.0) -> EmbeddingResult:
    """Per-snapshot embedding from the first ``k`` perturbed context eigenvectors."""
    cp = context_perturbation(graph, k, tau)
    dynamic = tuple(V[:, :k] for V in cp.vectors)
    return EmbeddingResult(Method.CONTEXT_AWARE, cp.context_vectors[:, :k], dynamic,
                           cp.context_eigenvalues[:k])


def counterexample_graphs() -> tuple[np.ndarray, np.ndarray]:
    """Two 3-node snapshots: a star centred on node 2 and one centred on node 1."""
    g1 = np.array([[0, 0, 1], [0, 0, 1], [1, 1, 0]], dtype=float)
    g2 = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)
    return g1, g2
