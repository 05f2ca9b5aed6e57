"""Per-snapshot normalized operators and their n x nT unfoldings."""
from __future__ import annotations

import enum
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import DynamicGraph

DEFAULT_TAU = 0.1


class Variant(str, enum.Enum):
    UASE = "uase"
    ULSE_N1 = "ulse-n1"
    ULSE_N2 = "ulse-n2"


class SingularDegreeError(ValueError):
    """A node has zero degree and no regularization was requested."""


def _inv_sqrt_degrees(deg: np.ndarray, tau: float) -> np.ndarray:
    deg = np.asarray(deg, dtype=float) + tau
    if np.any(deg <= 0):
        bad = np.flatnonzero(deg <= 0)
        raise SingularDegreeError(
            f"{bad.size} node(s) with non-positive degree (first: {bad[0]}); use tau > 0"
        )
    return 1.0 / np.sqrt(deg)


def laplacian_n1(adjacency: np.ndarray, tau: float = DEFAULT_TAU) -> np.ndarray:
    """``I - (D + tau I)^{-1/2} A (D + tau I)^{-1/2}``."""
    A = np.asarray(adjacency, dtype=float)
    s = _inv_sqrt_degrees(A.sum(axis=1), tau)
    return np.eye(A.shape[0]) - s[:, None] * A * s[None, :]


def laplacian_n2(adjacency_t: np.ndarray, aggregated_degrees: np.ndarray,
                 tau: float = DEFAULT_TAU) -> np.ndarray:
    """``-(D_agg + tau I)^{-1/2} A_t (D_t + tau I)^{-1/2}``; not symmetric in general."""
    A = np.asarray(adjacency_t, dtype=float)
    agg = np.asarray(aggregated_degrees, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or agg.shape != (A.shape[0],):
        raise ValueError(f"shape mismatch: adjacency {A.shape}, aggregated degrees {agg.shape}")
    left = _inv_sqrt_degrees(agg, tau)
    right = _inv_sqrt_degrees(A.sum(axis=1), tau)
    return -(left[:, None] * A * right[None, :])


@dataclass(frozen=True)
class UnfoldedOperator:
    variant: Variant
    matrix: np.ndarray  # (n, n*T)
    n: int
    T: int
    tau: float

    def block(self, t: int) -> np.ndarray:
        return self.matrix[:, t * self.n:(t + 1) * self.n]

    def to_csv(self, path: str | os.PathLike) -> None:
        np.savetxt(path, self.matrix, delimiter=",", fmt="%.17e")


def _matrices(graph_or_probs) -> list[np.ndarray]:
    if isinstance(graph_or_probs, DynamicGraph):
        return list(graph_or_probs.snapshots)
    mats = [np.asarray(M, dtype=float) for M in graph_or_probs]
    if not mats:
        raise ValueError("no snapshots given")
    n = mats[0].shape[0]
    for t, M in enumerate(mats):
        if M.shape != (n, n):
            raise ValueError(f"snapshot {t} has shape {M.shape}, expected {(n, n)}")
    return mats


def snapshot_blocks(graph_or_probs: DynamicGraph | Sequence[np.ndarray], variant: Variant | str,
                    tau: float = DEFAULT_TAU) -> list[np.ndarray]:
    variant = Variant(variant)
    mats = _matrices(graph_or_probs)
    if variant is Variant.UASE:
        return [M.copy() for M in mats]
    if variant is Variant.ULSE_N1:
        return [laplacian_n1(M, tau) for M in mats]
    agg = sum(M.sum(axis=1) for M in mats)
    return [laplacian_n2(M, agg, tau) for M in mats]


def unfold(graph_or_probs: DynamicGraph | Sequence[np.ndarray], variant: Variant | str,
           tau: float = DEFAULT_TAU) -> UnfoldedOperator:
    """Horizontally concatenate the per-snapshot operators of ``variant``.

    Accepts a :class:`DynamicGraph` or a sequence of real matrices (e.g. the
    edge-probability matrices of a noise-free model).
    """
    variant = Variant(variant)
    blocks = snapshot_blocks(graph_or_probs, variant, tau)
    n = blocks[0].shape[0]
    return UnfoldedOperator(variant, np.hstack(blocks), n, len(blocks), float(tau))
