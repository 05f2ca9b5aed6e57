"""Trial runners shared by the command line and the scripts in ``scripts/``.

Trial ``i`` of an experiment uses seed ``base_seed + i`` for both the graph
sample and k-means. Trials run in a process pool capped by ``DYNSPECT_THREADS``
and are always collected in trial order.
"""
from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import sbm
from .evaluation import (cluster_embedding, equal_row_pairs, equal_time_triples,
                         stability_report)
from .graph import DynamicGraph, load_manifest, write_snapshots
from .operators import DEFAULT_TAU
from .spectral import EmbeddingResult, Method, align, default_dimension, embed, noise_free_embed

DEFAULT_METHODS = ("uase", "ulse-n1", "ulse-n2")


@dataclass
class ExperimentConfig:
    dataset: str = "synthetic1"  # preset name or path to a manifest.json
    methods: list[str] = field(default_factory=lambda: list(DEFAULT_METHODS))
    d: dict[str, int] | str = "auto"
    tau: float = DEFAULT_TAU
    trials: int = 20
    base_seed: int = 0
    restarts: int = 10
    mode: str = "average"
    n: int = 200
    p: float = 0.4
    q: float = 0.2
    K: int | None = None  # needed for d="auto" on manifest datasets without labels
    outdir: str = "runs"

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.mode not in ("average", "pooled"):
            raise ValueError(f"unknown aggregation mode {self.mode!r}")
        self.methods = [Method(m).value for m in self.methods]

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def seed(self, trial: int) -> int:
        return self.base_seed + trial

    def digest(self) -> str:
        body = {k: v for k, v in asdict(self).items() if k != "outdir"}
        return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()[:16]

    @property
    def is_preset(self) -> bool:
        return self.dataset in sbm.PRESETS

    @property
    def dataset_name(self) -> str:
        return self.dataset if self.is_preset else Path(self.dataset).parent.name or "manifest"

    def dimension(self, method: str, K: int) -> int:
        if isinstance(self.d, dict) and method in self.d:
            return int(self.d[method])
        if isinstance(self.d, int):
            return self.d
        return default_dimension(method, K)


def worker_count(jobs: int) -> int:
    cap = os.environ.get("DYNSPECT_THREADS")
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, min(n, jobs))


def run_parallel(fn: Callable, args: Sequence) -> list:
    workers = worker_count(len(args))
    if workers == 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args))


# --------------------------------------------------------------------------- datasets

@dataclass
class Dataset:
    graph: DynamicGraph
    truths: list[np.ndarray] | None
    probs: tuple[np.ndarray, ...] | None
    K: int | None
    model: sbm.SbmModel | None = None
    labels: np.ndarray | None = None


def preset_model(cfg: ExperimentConfig, seed: int) -> sbm.SbmModel:
    return sbm.synthetic_preset(cfg.dataset, n=cfg.n, seed=seed, p=cfg.p, q=cfg.q)


def load_dataset(cfg: ExperimentConfig, seed: int) -> Dataset:
    if cfg.is_preset:
        model = preset_model(cfg, seed)
        s = sbm.sample(model)
        return Dataset(s.graph, sbm.behaviour_labels(model, s.labels, shared=cfg.mode == "pooled"),
                       s.probability_matrices, model.K, model, s.labels)
    return load_generated(cfg.dataset, K=cfg.K)


def write_generated(sample: sbm.SbmSample, model: sbm.SbmModel, outdir, force: bool = False,
                    provenance: dict | None = None) -> list[Path]:
    """Write snapshots, ``labels.json`` and ``manifest.json``.

    ``labels.json`` also carries the model, which fixes every probability
    matrix through ``P_t[i, j] = rho * B_t[z_i, z_j]``. ``provenance`` (for
    example config hash and seed) goes into a comment line of every edge list
    and into both JSON files.
    """
    outdir = Path(outdir)
    if outdir.exists() and any(outdir.iterdir()) and not force:
        raise FileExistsError(f"{outdir} exists and is not empty; pass --force to overwrite")
    provenance = provenance or {}
    header = " ".join(f"{k}={v}" for k, v in provenance.items()) or None
    paths = write_snapshots(sample.graph, outdir, header=header)
    labels = {
        "labels": sample.labels.tolist(),
        "snapshot_labels": [z.tolist() for z in sbm.behaviour_labels(model, sample.labels)],
        "model": json.loads(model.to_json()),
        **provenance,
    }
    (outdir / "labels.json").write_text(json.dumps(labels))
    manifest = json.loads((outdir / "manifest.json").read_text())
    manifest["labels"] = "labels.json"
    manifest.update(provenance)
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return paths + [outdir / "labels.json", outdir / "manifest.json"]


def load_generated(manifest_path, K: int | None = None) -> Dataset:
    manifest_path = Path(manifest_path)
    graph = load_manifest(manifest_path)
    meta = json.loads(manifest_path.read_text())
    if "labels" not in meta:
        return Dataset(graph, None, None, K)
    info = json.loads((manifest_path.parent / meta["labels"]).read_text())
    truths = [np.asarray(z) for z in info.get("snapshot_labels", [])] or None
    model = labels = probs = None
    if "model" in info:
        model = sbm.SbmModel.from_json(json.dumps(info["model"]))
        labels = np.asarray(info["labels"])
        probs = sbm.probability_matrices(model, labels)
        K = model.K
    elif "labels" in info:
        K = K or len(np.unique(info["labels"]))
    return Dataset(graph, truths, probs, K, model, labels)


# --------------------------------------------------------------------------- evaluate

def _evaluate_trial(args):
    cfg, trial = args
    seed = cfg.seed(trial)
    ds = load_dataset(cfg, seed)
    if ds.truths is None:
        raise ValueError("evaluation needs ground-truth labels (labels.json next to the manifest)")
    rows = []
    for m in cfg.methods:
        emb = embed(ds.graph, m, cfg.dimension(m, ds.K), tau=cfg.tau)
        met = cluster_embedding(emb, ds.truths, seed=seed, restarts=cfg.restarts, mode=cfg.mode)
        rows.append({"method": m, "dataset": cfg.dataset_name, "trial": trial, "seed": seed,
                     "acc": met.acc, "nmi": met.nmi, "ari": met.ari, "f1": met.f1,
                     "per_snapshot": met.per_snapshot})
    return rows


def evaluate(cfg: ExperimentConfig) -> list[list[dict]]:
    """Per-trial metric rows (outer list indexed by trial)."""
    return run_parallel(_evaluate_trial, [(cfg, i) for i in range(cfg.trials)])


def summarize(results: list[list[dict]]) -> dict[str, dict[str, tuple[float, float]]]:
    """``{method: {metric: (mean, std)}}`` over trials."""
    out = {}
    for m in [r["method"] for r in results[0]]:
        out[m] = {}
        for key in ("acc", "nmi", "ari", "f1"):
            vals = np.array([r[key] for rows in results for r in rows if r["method"] == m])
            out[m][key] = (float(vals.mean()), float(vals.std(ddof=1)) if vals.size > 1 else 0.0)
    return out


def table_rows(dataset: str, summary: dict) -> list[list[str]]:
    """Rows laid out like the clustering table: dataset, metric, one column per method."""
    methods = list(summary)
    rows = [["dataset", "metric", *methods, *(f"{m}_std" for m in methods)]]
    for key in ("acc", "nmi", "ari", "f1"):
        rows.append([dataset, key.upper(), *(f"{summary[m][key][0]:.3f}" for m in methods),
                     *(f"{summary[m][key][1]:.3f}" for m in methods)])
    return rows


# --------------------------------------------------------------------------- stability

def max_aligned_row_error(observed: EmbeddingResult, reference: EmbeddingResult) -> float:
    """``max_{t,i} ||Y_t[i] - Y~_t[i] W||`` with one Procrustes ``W`` over all snapshots."""
    W, _ = align(reference.stacked(), observed.stacked())
    diff = observed.stacked() - reference.stacked() @ W
    return float(np.linalg.norm(diff, axis=1).max())


def stability_for(emb: EmbeddingResult, probs: Sequence[np.ndarray]) -> dict:
    # the longitudinal guarantee of ULSE-n1 additionally needs equal degree matrices
    strict = emb.method is Method.ULSE_N1
    rep = stability_report(emb, equal_row_pairs(probs), equal_time_triples(probs, strict))
    return asdict(rep)


def _stability_trial(args):
    cfg, trial = args
    seed = cfg.seed(trial)
    ds = load_dataset(cfg, seed)
    out = []
    for m in cfg.methods:
        d = cfg.dimension(m, ds.K)
        obs = embed(ds.graph, m, d, tau=cfg.tau)
        rec = {"method": m, "dataset": cfg.dataset_name, "trial": trial, "seed": seed, "d": d}
        if ds.probs is not None:
            rec["observed"] = stability_for(obs, ds.probs)
            nf = noise_free_embed(ds.probs, m, d)
            rec["noise_free"] = stability_for(nf, ds.probs)
            rec["max_aligned_row_error"] = max_aligned_row_error(obs, nf)
        out.append(rec)
    return out


def stability(cfg: ExperimentConfig) -> list[list[dict]]:
    return run_parallel(_stability_trial, [(cfg, i) for i in range(cfg.trials)])


# --------------------------------------------------------------------------- convergence

def _convergence_trial(args):
    name, n, seed, tau = args
    model = sbm.synthetic_preset(name, n=n, seed=seed)
    s = sbm.sample(model)
    d = default_dimension(Method.ULSE_N1, model.K)
    obs = embed(s.graph, Method.ULSE_N1, d, tau=tau)
    nf = noise_free_embed(s.probability_matrices, Method.ULSE_N1, d)
    return max_aligned_row_error(obs, nf)


def convergence(sizes: Sequence[int] = (200, 800), trials: int = 20, base_seed: int = 0,
                preset: str = "synthetic1", tau: float = 0.0) -> dict[int, list[float]]:
    """Aligned max-row error between observed and noise-free ULSE-n1 embeddings."""
    jobs = [(preset, n, base_seed + i, tau) for n in sizes for i in range(trials)]
    errs = run_parallel(_convergence_trial, jobs)
    return {n: errs[k * trials:(k + 1) * trials] for k, n in enumerate(sizes)}


# --------------------------------------------------------------------------- sweep

def _sweep_trial(args):
    cfg, p, trial = args
    c = ExperimentConfig(**{**asdict(cfg), "p": p, "trials": 1, "base_seed": cfg.seed(trial)})
    return _evaluate_trial((c, 0))


def sweep(cfg: ExperimentConfig, ps: Sequence[float]) -> list[dict]:
    """Mean metrics per (p, method) for the preset with ``q`` held fixed."""
    jobs = [(cfg, float(p), i) for p in ps for i in range(cfg.trials)]
    res = run_parallel(_sweep_trial, jobs)
    out = []
    for k, p in enumerate(ps):
        chunk = res[k * cfg.trials:(k + 1) * cfg.trials]
        for m, stats in summarize(chunk).items():
            out.append({"p": float(p), "q": cfg.q, "method": m,
                        **{f"{key}": stats[key][0] for key in stats},
                        **{f"{key}_std": stats[key][1] for key in stats}})
    return out
