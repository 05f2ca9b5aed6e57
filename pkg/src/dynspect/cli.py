"""``dynspect`` command line.

Exit codes: 0 success, 2 configuration error, 3 numeric error, 4 I/O error.
Settings come from ``--config`` (JSON) overridden by explicit flags.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import sbm
from .cheeger import SizeError, dynamic_cheeger, random_corpus
from .context import DegenerateSpectrumError, context_perturbation, counterexample_graphs
from .experiments import (ExperimentConfig, evaluate, load_dataset, stability, summarize, sweep,
                          table_rows, write_generated)
from .operators import SingularDegreeError
from .spectral import EmbeddingResult, NumericError, embed

EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 2, 3, 4

_CONFIG_FLAGS = ("dataset", "methods", "d", "tau", "trials", "base_seed", "restarts", "mode",
                 "n", "p", "q", "K", "outdir")


def _config(args) -> ExperimentConfig:
    base = {}
    if getattr(args, "config", None):
        base = json.loads(Path(args.config).read_text())
    for key in _CONFIG_FLAGS:
        val = getattr(args, key, None)
        if val is not None:
            base[key] = val
    if isinstance(base.get("d"), str) and base["d"] != "auto":
        base["d"] = int(base["d"])
    return ExperimentConfig.from_dict(base)


def _provenance(cfg: ExperimentConfig, seed: int | None = None) -> dict:
    return {"config_hash": cfg.digest(), "seed": seed, "config": asdict(cfg)}


def _prepare(path: Path, force: bool) -> Path:
    if path.exists() and any(path.iterdir()) and not force:
        raise FileExistsError(f"{path} exists and is not empty; pass --force to overwrite")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def write_embedding(emb: EmbeddingResult, directory: Path, config_hash: str, seed: int) -> None:
    """``embedding.csv`` (anchor rows use t = -1) and ``embedding.json``."""
    header = f"config_hash={config_hash} seed={seed}"
    dims = [f"dim{j}" for j in range(emb.d)]
    with open(directory / "embedding.csv", "w", newline="") as fh:
        fh.write(f"# {header}\n")
        w = csv.writer(fh)
        w.writerow(["node", "t", *dims])
        for i, row in enumerate(emb.anchor):
            w.writerow([i, -1, *(repr(float(x)) for x in row)])
        for t, Y in enumerate(emb.dynamic):
            for i, row in enumerate(Y):
                w.writerow([i, t, *(repr(float(x)) for x in row)])
    _dump(directory / "embedding.json", {
        "config_hash": config_hash, "seed": seed, "method": emb.method.value, "d": emb.d,
        "singular_values": emb.singular_values.tolist(),
        "anchor": emb.anchor.tolist(), "dynamic": [Y.tolist() for Y in emb.dynamic],
    })


# --------------------------------------------------------------------------- commands

def cmd_generate(args) -> int:
    cfg = _config(args)
    if not cfg.is_preset:
        raise ValueError(f"generate needs a preset dataset, got {cfg.dataset!r}")
    model = sbm.synthetic_preset(cfg.dataset, n=cfg.n, seed=cfg.base_seed, p=cfg.p, q=cfg.q)
    sample = sbm.sample(model)
    out = Path(args.out or Path(cfg.outdir) / cfg.dataset / f"seed_{cfg.base_seed}")
    paths = write_generated(sample, model, out, force=args.force,
                            provenance={"config_hash": cfg.digest(), "seed": cfg.base_seed})
    print(f"wrote {len(paths)} files to {out}")
    return 0


def cmd_embed(args) -> int:
    cfg = _config(args)
    root = _prepare(Path(cfg.outdir) / cfg.dataset_name, args.force)
    for trial in range(cfg.trials):
        seed = cfg.seed(trial)
        ds = load_dataset(cfg, seed)
        K = ds.K or cfg.K
        if K is None and cfg.d == "auto":
            raise ValueError("cannot infer d: give --d or --K for unlabeled data")
        for m in cfg.methods:
            emb = embed(ds.graph, m, cfg.dimension(m, K), tau=cfg.tau)
            d = root / m / f"trial_{trial}"
            d.mkdir(parents=True, exist_ok=True)
            write_embedding(emb, d, cfg.digest(), seed)
            _dump(d / "provenance.json", _provenance(cfg, seed))
    print(f"embeddings written under {root}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    root = _prepare(Path(cfg.outdir) / cfg.dataset_name, args.force)
    results = evaluate(cfg)
    for trial, rows in enumerate(results):
        for r in rows:
            d = root / r["method"] / f"trial_{trial}"
            d.mkdir(parents=True, exist_ok=True)
            _dump(d / "metrics.json", {**r, **_provenance(cfg, r["seed"])})
    summary = summarize(results)
    with open(root / "summary.csv", "w", newline="") as fh:
        fh.write(f"# config_hash={cfg.digest()} base_seed={cfg.base_seed} trials={cfg.trials}\n")
        csv.writer(fh).writerows(table_rows(cfg.dataset_name, summary))
    for m, s in summary.items():
        print(f"{m:10s} " + "  ".join(f"{k.upper()} {v[0]:.3f}±{v[1]:.3f}" for k, v in s.items()))
    return 0


def cmd_stability(args) -> int:
    cfg = _config(args)
    root = _prepare(Path(cfg.outdir) / cfg.dataset_name, args.force)
    for trial, recs in enumerate(stability(cfg)):
        for r in recs:
            d = root / r["method"] / f"trial_{trial}"
            d.mkdir(parents=True, exist_ok=True)
            _dump(d / "stability.json", {**r, **_provenance(cfg, r["seed"])})
            nf = r.get("noise_free", {})
            print(f"trial {trial} {r['method']:8s} noise-free cross {nf.get('cross_sectional_rel_max', float('nan')):.2e} "
                  f"longitudinal {nf.get('longitudinal_rel_max', float('nan')):.2e} "
                  f"aligned error {r.get('max_aligned_row_error', float('nan')):.3e}")
    return 0


def cmd_cheeger(args) -> int:
    cfg = _config(args)
    if args.random:
        graphs = random_corpus(args.random, seed=args.seed)
        seed = args.seed
    else:
        graphs = [load_dataset(cfg, cfg.base_seed).graph]
        seed = cfg.base_seed
    reports = []
    for g in graphs:
        for k in args.k:
            reports.append(json.loads(dynamic_cheeger(g, k, tau=args.tau).to_json()))
    payload = {"config_hash": cfg.digest(), "seed": seed, "reports": reports,
               "all_lower_bounds_hold": all(r["lower_bound_holds"] for r in reports),
               "all_classical_hold": all(r["classical_holds"] for r in reports)}
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0 if payload["all_lower_bounds_hold"] else 1


def counterexample_summary() -> dict:
    g1, g2 = counterexample_graphs()
    cp = context_perturbation([g1, g2])
    return {
        "context_eigenvalues": cp.context_eigenvalues.tolist(),
        "eigenvalue_shifts": cp.eigenvalue_shifts.tolist(),
        "eigenvalue_shift_difference": float(np.abs(cp.eigenvalue_shifts[0] - cp.eigenvalue_shifts[1]).max()),
        "eigenvector_difference": float(np.abs(cp.vectors[0] - cp.vectors[1]).max()),
        "adjacency_difference": float(np.abs(g1 - g2).max()),
    }


def cmd_counterexample(args) -> int:
    s = counterexample_summary()
    print("context eigenvalues:", ", ".join(f"{x:.12f}" for x in s["context_eigenvalues"]))
    print("expected           : 0, 4/3, 5/3")
    for t, row in enumerate(s["eigenvalue_shifts"], start=1):
        print(f"eigenvalue shifts G{t}:", ", ".join(f"{x:+.12f}" for x in row))
    print(f"max |shift G1 - shift G2|       = {s['eigenvalue_shift_difference']:.3e}")
    print(f"max |vector G1 - vector G2|     = {s['eigenvector_difference']:.3e}")
    print(f"max |A1 - A2|                   = {s['adjacency_difference']:.0f}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    ps = np.round(np.arange(args.p_min, args.p_max + 1e-9, args.p_step), 10)
    root = _prepare(Path(cfg.outdir) / f"sweep_{cfg.dataset_name}", args.force)
    rows = sweep(cfg, ps)
    with open(root / "sweep.csv", "w", newline="") as fh:
        fh.write(f"# config_hash={cfg.digest()} base_seed={cfg.base_seed} trials={cfg.trials}\n")
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    for r in rows:
        print(f"p={r['p']:.3f} {r['method']:8s} NMI {r['nmi']:.3f} ARI {r['ari']:.3f} ACC {r['acc']:.3f}")
    return 0


# --------------------------------------------------------------------------- parser

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--dataset", help="synthetic1, synthetic2, or a manifest.json path")
    p.add_argument("--methods", nargs="+", choices=["uase", "ulse-n1", "ulse-n2"])
    p.add_argument("--d", help="embedding dimension for every method, or 'auto'")
    p.add_argument("--tau", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--base-seed", dest="base_seed", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--mode", choices=["average", "pooled"])
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--K", type=int)
    p.add_argument("--outdir")
    p.add_argument("--force", action="store_true", help="overwrite existing outputs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynspect", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a synthetic dynamic SBM to disk")
    _add_common(g)
    g.add_argument("--out", help="output directory (default <outdir>/<preset>/seed_<seed>)")
    g.set_defaults(func=cmd_generate)

    for name, func, text in (("embed", cmd_embed, "write embeddings per method"),
                             ("evaluate", cmd_evaluate, "k-means clustering metrics per method"),
                             ("stability", cmd_stability, "stability reports incl. noise-free oracle")):
        sp = sub.add_parser(name, help=text)
        _add_common(sp)
        sp.set_defaults(func=func)

    c = sub.add_parser("cheeger", help="dynamic Cheeger bound on small graphs")
    _add_common(c)
    c.add_argument("--k", type=int, nargs="+", default=[2])
    c.add_argument("--random", type=int, default=0, help="use N seeded random small graphs instead")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c.set_defaults(func=cmd_cheeger, tau=0.0)

    sub.add_parser("counterexample", help="context-aware perturbation counterexample").set_defaults(
        func=cmd_counterexample)

    s = sub.add_parser("sweep", help="metrics over a grid of intra-community probabilities p")
    _add_common(s)
    s.add_argument("--p-min", type=float, default=0.25)
    s.add_argument("--p-max", type=float, default=0.6)
    s.add_argument("--p-step", type=float, default=0.05)
    s.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileExistsError, FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericError, SingularDegreeError, DegenerateSpectrumError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError, IndexError, SizeError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
