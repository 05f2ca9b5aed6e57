"""Exact k-way conductance on small graphs and the dynamic Cheeger bound."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .graph import DynamicGraph
from .operators import Variant, laplacian_n1, unfold

MAX_ASSIGNMENTS = 2_000_000


class SizeError(ValueError):
    pass


@dataclass(frozen=True)
class Conductance:
    phi: float
    partition: tuple[int, ...] | None
    disconnected: bool = False


def _assignments(n: int, k: int) -> np.ndarray:
    # node 0 pinned to part 0 removes one factor of k of relabelling symmetry
    grids = np.indices((k,) * (n - 1), dtype=np.int8).reshape(n - 1, -1).T
    return np.hstack([np.zeros((grids.shape[0], 1), dtype=np.int8), grids])


def conductance_exact(adjacency: np.ndarray, k: int = 2) -> Conductance:
    """Minimum over k-way partitions of the largest ``cut(S_j) / vol(S_j)``.

    For ``k = 2`` this equals ``min_S cut(S) / min(vol S, vol S^c)``. A
    disconnected graph returns ``phi = 0`` with ``disconnected=True`` and no
    enumeration.
    """
    A = np.asarray(adjacency, dtype=float)
    n = A.shape[0]
    if k < 2 or k > n:
        raise ValueError(f"need 2 <= k <= n, got k={k}, n={n}")
    if k ** (n - 1) > MAX_ASSIGNMENTS:
        raise SizeError(f"{k}-way enumeration over {n} nodes is too large")
    ncomp, _ = connected_components(A, directed=False)
    if ncomp > 1:
        return Conductance(0.0, None, True)

    deg = A.sum(axis=1)
    labels = _assignments(n, k)
    worst = np.zeros(labels.shape[0])
    valid = np.ones(labels.shape[0], dtype=bool)
    for j in range(k):
        X = (labels == j).astype(float)
        vol = X @ deg
        inside = ((X @ A) * X).sum(axis=1)
        valid &= vol > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            worst = np.maximum(worst, (vol - inside) / vol)
    worst[~valid] = np.inf
    best = int(np.argmin(worst))
    return Conductance(float(worst[best]), tuple(int(x) for x in labels[best]))


@dataclass
class CheegerReport:
    k: int
    sigma_k: float
    phi_dynamic: float
    phi_per_snapshot: list[float]
    leave_one_out_norms: list[float]
    lower_bound: float
    snapshot_lambda_k: list[float]
    sqrt_sigma_k: float  # poly(k) * sqrt(sigma_k) bounds phi_dynamic above; poly(k) is unknown
    classical_lower: list[float] | None = None  # k = 2: lambda_2 / 2 per snapshot
    classical_upper: list[float] | None = None  # k = 2: sqrt(2 lambda_2) per snapshot

    @property
    def lower_bound_holds(self) -> bool:
        return self.lower_bound <= self.phi_dynamic + 1e-12

    @property
    def classical_holds(self) -> bool:
        if self.classical_lower is None:
            return True
        return all(lo <= phi + 1e-12 and phi <= hi + 1e-12 for lo, phi, hi in
                   zip(self.classical_lower, self.phi_per_snapshot, self.classical_upper))

    def to_json(self) -> str:
        d = asdict(self)
        d["lower_bound_holds"] = self.lower_bound_holds
        d["classical_holds"] = self.classical_holds
        return json.dumps(d, indent=2)


def dynamic_cheeger(graph: DynamicGraph, k: int = 2, tau: float = 0.0) -> CheegerReport:
    """Compare the unfolded-Laplacian lower bound with brute-force dynamic conductance.

    ``sigma_k`` is the k-th smallest singular value of the full ULSE-n1
    unfolded Laplacian (no exclusion of the smallest one). The leave-one-out
    norm of a single-snapshot graph is 0.
    """
    op = unfold(graph, Variant.ULSE_N1, tau)
    sig = np.sort(np.linalg.svd(op.matrix, compute_uv=False))
    sigma_k = float(sig[k - 1])
    loo = []
    for t in range(op.T):
        rest = [op.block(s) for s in range(op.T) if s != t]
        loo.append(float(np.linalg.norm(np.hstack(rest), 2)) if rest else 0.0)
    lower = float(np.sqrt(max(sigma_k ** 2 - min(loo) ** 2, 0.0)) / 2.0)
    phis = [conductance_exact(A, k).phi for A in graph.snapshots]
    lam = [np.linalg.eigvalsh(laplacian_n1(A, tau)) for A in graph.snapshots]
    report = CheegerReport(
        k=k, sigma_k=sigma_k, phi_dynamic=max(phis), phi_per_snapshot=phis,
        leave_one_out_norms=loo, lower_bound=lower,
        snapshot_lambda_k=[float(v[k - 1]) for v in lam], sqrt_sigma_k=float(np.sqrt(sigma_k)),
    )
    if k == 2:
        report.classical_lower = [float(v[1] / 2) for v in lam]
        report.classical_upper = [float(np.sqrt(2 * max(v[1], 0.0))) for v in lam]
    return report


def random_connected_snapshot(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    for _ in range(10_000):
        upper = np.triu(rng.random((n, n)) < p, 1)
        A = (upper | upper.T).astype(float)
        if connected_components(A, directed=False)[0] == 1:
            return A
    raise RuntimeError(f"could not draw a connected G({n}, {p})")


def random_corpus(count: int, seed: int = 0, n_range=(5, 12), T_choices=(2, 3)):
    """Seeded small dynamic graphs whose every snapshot is connected."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        T = int(rng.choice(T_choices))
        p = float(rng.uniform(0.25, 0.7))
        out.append(DynamicGraph(tuple(random_connected_snapshot(n, p, rng) for _ in range(T))))
    return out

