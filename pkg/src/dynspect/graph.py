"""Dynamic graph container, degree bookkeeping and edge-list I/O."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class GraphFormatError(ValueError):
    """Raised for malformed edge-list input or inconsistent snapshots."""


@dataclass(frozen=True)
class DynamicGraph:
    """T symmetric 0/1 adjacency snapshots over the node set ``range(n)``.

    Snapshots are stored densely as read-only float64 arrays.
    """

    snapshots: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.snapshots) == 0:
            raise GraphFormatError("a dynamic graph needs at least one snapshot")
        frozen = []
        n = self.snapshots[0].shape[0]
        for t, A in enumerate(self.snapshots):
            A = np.array(A, dtype=float)
            if A.shape != (n, n):
                raise GraphFormatError(f"snapshot {t} has shape {A.shape}, expected {(n, n)}")
            if not np.array_equal(A, A.T):
                raise GraphFormatError(f"snapshot {t} is not symmetric")
            if not np.all((A == 0) | (A == 1)):
                raise GraphFormatError(f"snapshot {t} has entries outside {{0, 1}}")
            if np.any(np.diag(A) != 0):
                raise GraphFormatError(f"snapshot {t} has self-loops")
            A.setflags(write=False)
            frozen.append(A)
        object.__setattr__(self, "snapshots", tuple(frozen))

    @classmethod
    def from_arrays(cls, arrays: Sequence[np.ndarray]) -> "DynamicGraph":
        return cls(tuple(arrays))

    @property
    def n(self) -> int:
        return self.snapshots[0].shape[0]

    @property
    def T(self) -> int:
        return len(self.snapshots)

    def edges(self, t: int) -> list[tuple[int, int]]:
        """Edges of snapshot ``t`` as sorted ``(u, v)`` pairs with ``u < v``."""
        iu, ju = np.nonzero(np.triu(self.snapshots[t], 1))
        return list(zip(iu.tolist(), ju.tolist()))

    def adjacency_lists(self, t: int) -> list[list[int]]:
        A = self.snapshots[t]
        return [np.flatnonzero(A[i]).tolist() for i in range(self.n)]

    def __eq__(self, other):
        if not isinstance(other, DynamicGraph):
            return NotImplemented
        return self.T == other.T and all(
            np.array_equal(a, b) for a, b in zip(self.snapshots, other.snapshots)
        )

    __hash__ = None


@dataclass(frozen=True)
class DegreeSummary:
    per_snapshot_degrees: np.ndarray  # (T, n)
    aggregated_degrees: np.ndarray  # (n,)
    per_snapshot_min: np.ndarray = field(repr=False)  # (T,)


def degrees_of(matrices: Sequence[np.ndarray]) -> DegreeSummary:
    """Row sums per matrix and their sum over time.

    Works for 0/1 adjacencies and for real-valued probability matrices alike.
    """
    per = np.stack([np.asarray(M, dtype=float).sum(axis=1) for M in matrices])
    return DegreeSummary(per, per.sum(axis=0), per.min(axis=1))


def compute_degrees(graph: DynamicGraph) -> DegreeSummary:
    return degrees_of(graph.snapshots)


def _read_edge_list(path, n: int) -> np.ndarray:
    A = np.zeros((n, n))
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphFormatError(f"{path}:{lineno}: expected 'u v', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError(f"{path}:{lineno}: non-integer node id in {line!r}") from None
            if not (0 <= u < n and 0 <= v < n):
                raise IndexError(f"{path}:{lineno}: node id out of range [0, {n}) in {line!r}")
            if u == v:
                raise GraphFormatError(f"{path}:{lineno}: self-loop on node {u}")
            A[u, v] = A[v, u] = 1.0
    return A


def load_snapshots(paths: Sequence[str | os.PathLike], n: int) -> DynamicGraph:
    """Read one edge-list file per snapshot, in the given order."""
    return DynamicGraph(tuple(_read_edge_list(p, n) for p in paths))


def load_manifest(path: str | os.PathLike) -> DynamicGraph:
    """Load ``{"snapshots": [...], "n": int}``; relative paths resolve against the manifest."""
    path = Path(path)
    meta = json.loads(path.read_text())
    try:
        files, n = meta["snapshots"], int(meta["n"])
    except KeyError as exc:
        raise GraphFormatError(f"{path}: manifest missing key {exc}") from None
    return load_snapshots([path.parent / f for f in files], n)


def write_snapshots(graph: DynamicGraph, directory: str | os.PathLike, stem: str = "snapshot",
                    header: str | None = None) -> list[Path]:
    """Write each snapshot as an edge list plus a ``manifest.json`` next to them.

    ``header`` is written as a leading ``#`` comment line in every edge list.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for t in range(graph.T):
        name = f"{stem}_{t}.txt"
        lines = (f"# {header}\n" if header else "") + "".join(f"{u} {v}\n" for u, v in graph.edges(t))
        (directory / name).write_text(lines)
        names.append(name)
    (directory / "manifest.json").write_text(json.dumps({"snapshots": names, "n": graph.n}, indent=2))
    return [directory / nm for nm in names]
