"""Seeded dynamic stochastic block model.

Reproducibility contract: a ``numpy.random.PCG64`` stream seeded with the model
seed is consumed first by ``n`` categorical label draws (``Generator.choice``),
then by one uniform per ``(i, j, t)`` with ``i < j`` in row-major order (``t``
fastest). Edge ``(i, j)`` is present in snapshot ``t`` iff its uniform is below
``P[t][i, j]``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import DynamicGraph

PRESETS = {
    "synthetic1": (0.3, 0.4, 0.3),
    "synthetic2": (0.4, 0.5, 0.1),
}


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class SbmModel:
    pi: tuple[float, ...]
    B: tuple[np.ndarray, ...]
    n: int
    rho: float = 1.0
    seed: int = 0

    def __post_init__(self):
        pi = tuple(float(x) for x in self.pi)
        B = tuple(np.array(b, dtype=float) for b in self.B)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "B", B)
        K = len(pi)
        if K == 0 or abs(sum(pi) - 1.0) > 1e-12:
            raise ModelError(f"community probabilities must sum to 1, got {sum(pi)!r}")
        if any(p <= 0 for p in pi):
            raise ModelError("every community probability must be positive")
        if not B:
            raise ModelError("need at least one block matrix")
        for t, b in enumerate(B):
            if b.shape != (K, K):
                raise ModelError(f"B[{t}] has shape {b.shape}, expected {(K, K)}")
            if not np.array_equal(b, b.T):
                raise ModelError(f"B[{t}] is not symmetric")
            if b.min() <= 0 or b.max() > 1:
                raise ModelError(f"B[{t}] entries must lie in (0, 1]")
        if not 0 < self.rho <= 1:
            raise ModelError(f"rho must lie in (0, 1], got {self.rho}")
        if self.n < 1:
            raise ModelError("n must be positive")

    @property
    def K(self) -> int:
        return len(self.pi)

    @property
    def T(self) -> int:
        return len(self.B)

    def with_(self, **changes) -> "SbmModel":
        kw = dict(pi=self.pi, B=self.B, n=self.n, rho=self.rho, seed=self.seed)
        kw.update(changes)
        return SbmModel(**kw)

    def to_json(self) -> str:
        return json.dumps(
            {
                "K": self.K,
                "pi": list(self.pi),
                "B": [b.tolist() for b in self.B],
                "rho": self.rho,
                "n": self.n,
                "seed": self.seed,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "SbmModel":
        d = json.loads(text)
        model = cls(pi=tuple(d["pi"]), B=tuple(np.array(b) for b in d["B"]),
                    n=int(d["n"]), rho=float(d.get("rho", 1.0)), seed=int(d.get("seed", 0)))
        if "K" in d and int(d["K"]) != model.K:
            raise ModelError(f"K={d['K']} disagrees with len(pi)={model.K}")
        return model


@dataclass(frozen=True)
class SbmSample:
    graph: DynamicGraph
    labels: np.ndarray
    probability_matrices: tuple[np.ndarray, ...] = field(repr=False)


def probability_matrices(model: SbmModel, labels: np.ndarray) -> tuple[np.ndarray, ...]:
    """``P[t][i, j] = rho * B[t][z_i, z_j]``, diagonal included."""
    z = np.asarray(labels)
    return tuple(model.rho * b[np.ix_(z, z)] for b in model.B)


def sample(model: SbmModel, seed: int | None = None) -> SbmSample:
    """Draw labels and snapshots; ``seed`` overrides ``model.seed`` if given."""
    rng = np.random.Generator(np.random.PCG64(model.seed if seed is None else seed))
    n, T = model.n, model.T
    labels = rng.choice(model.K, size=n, p=np.asarray(model.pi))
    P = probability_matrices(model, labels)
    iu, ju = np.triu_indices(n, k=1)
    u = rng.random((iu.size, T))
    snaps = []
    for t in range(T):
        hit = (u[:, t] < P[t][iu, ju]).astype(float)
        A = np.zeros((n, n))
        A[iu, ju] = hit
        A[ju, iu] = hit
        snaps.append(A)
    return SbmSample(DynamicGraph(tuple(snaps)), labels, P)


def merge_blocks(p: float, q: float) -> tuple[np.ndarray, ...]:
    """Three-community merge pattern: all distinct, then 1+2 merged, then 2+3 merged."""
    b1 = np.full((3, 3), q)
    np.fill_diagonal(b1, p)
    b2 = b1.copy()
    b2[0, 1] = b2[1, 0] = p
    b3 = b1.copy()
    b3[1, 2] = b3[2, 1] = p
    return b1, b2, b3


def synthetic_preset(name: str, n: int = 200, seed: int = 0, p: float = 0.4, q: float = 0.2,
                     pi: Sequence[float] | None = None) -> SbmModel:
    if name not in PRESETS:
        raise ModelError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return SbmModel(pi=tuple(pi) if pi is not None else PRESETS[name],
                    B=merge_blocks(p, q), n=n, rho=1.0, seed=seed)


def behaviour_labels(model: SbmModel, labels: np.ndarray, shared: bool = False) -> list[np.ndarray]:
    """Per-snapshot ground truth: communities with identical block rows share a label.

    With ``shared=False`` labels are renumbered per snapshot by first appearance
    of the community index, so at t=1 of the merge presets they coincide with
    ``labels``. With ``shared=True`` a block row keeps the same id across all
    snapshots, which is what pooled (node, t) clustering is scored against.
    """
    out = []
    canon: dict[bytes, int] = {}
    for b in model.B:
        if not shared:
            canon = {}
        mapping = np.empty(model.K, dtype=int)
        for k in range(model.K):
            mapping[k] = canon.setdefault(b[k].tobytes(), len(canon))
        out.append(mapping[np.asarray(labels)])
    return out
