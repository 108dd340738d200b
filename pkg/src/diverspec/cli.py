"""Command-line front end.

Four subcommands: ``diagnose`` (homophily and frequency histograms),
``train`` (the runs x splits experiment grid), ``analyze`` (cluster learned
filter weights), and ``prop1-check`` (verify the coefficient-rescaling
identity). Exit codes: 0 success, 1 usage or config error, 2 data error,
3 numerical failure.

All randomness is derived from ``--seed``; outputs never embed timestamps,
so identical invocations produce byte-identical files. Files are written
atomically (temporary file + rename in the target directory).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import centroid_curves, cluster_weights, homophily_histogram
from .autodiff import make_rng
from .config import config_hash, load_config, resolved_dict
from .datasets import load_dataset
from .errors import ConfigError, DataError, DiverspecError, NumericalError, UsageError
from .graph import edge_homophily
from .model import DsfConfig
from .polynomials import Bernstein, Jacobi, Monomial, filter_response, rescale_coefficients
from .spectral import HISTOGRAM_BANDS, eigendecompose, frequency_histogram
from .graph import normalized_operators
from .training import make_splits, run_grid


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures routed to exit code 1."""

    def error(self, message: str):  # noqa: D102 - argparse hook
        raise UsageError(message)


def _write_text(path: Path, text: str) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: Path, obj) -> None:
    _write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _csv_lines(header: str, rows) -> str:
    return "".join([header + "\n"] + [",".join(str(c) for c in row) + "\n" for row in rows])


def _fmt(x: float) -> str:
    return repr(float(x))


def cmd_diagnose(args: argparse.Namespace) -> int:
    graph = load_dataset(args.data)
    out = Path(args.out)
    bands = [b.strip() for b in args.bands.split(",") if b.strip()]
    for band in bands:
        if band not in HISTOGRAM_BANDS:
            raise UsageError(f"unknown band {band!r}; choose from {','.join(HISTOGRAM_BANDS)}")

    ids, values = homophily_histogram(graph, k=args.k_hops)
    _write_text(
        out / "homophily.csv",
        _csv_lines("node_id,value", zip(ids, (_fmt(v) for v in values))),
    )

    _, l_hat = normalized_operators(graph)
    decomposition = eigendecompose(l_hat, dense_limit=args.dense_limit)
    for band in bands:
        hist = frequency_histogram(graph, decomposition, band, k=args.k_hops)
        _write_text(
            out / f"frequency_{band}.csv",
            _csv_lines("node_id,value", zip(hist.node_ids, (_fmt(v) for v in hist.values))),
        )
        _write_json(
            out / f"frequency_{band}.json",
            {
                "eigen_index": hist.eigen_index,
                "lambda_global": hist.lambda_global,
                "k": hist.k,
            },
        )

    settings = {"k_hops": args.k_hops, "bands": bands, "dense_limit": args.dense_limit}
    _write_json(
        out / "summary.json",
        {
            "dataset": str(args.data),
            "num_nodes": graph.num_nodes,
            "num_edges": graph.num_edges,
            "num_classes": graph.num_classes,
            "edge_homophily": edge_homophily(graph),
            "settings": settings,
        },
    )
    print(f"diagnose: wrote homophily + {len(bands)} frequency histograms to {out}")
    return 0


def _variant(args: argparse.Namespace) -> str:
    if args.baseline:
        return "baseline"
    if args.no_ipe:
        return "no-ipe"
    return "dsf"


def cmd_train(args: argparse.Namespace) -> int:
    graph = load_dataset(args.data)
    model_cfg, train_cfg = load_config(args.config)
    if args.mode is not None:
        model_cfg = model_cfg.with_mode(args.mode)
    variant = _variant(args)
    if variant == "no-ipe":
        model_cfg = dataclasses.replace(model_cfg, ablate_ipe=True)

    splits = make_splits(graph, args.split_mode, args.splits, args.seed)
    grid = run_grid(
        graph,
        model_cfg,
        train_cfg,
        runs=args.runs,
        splits=splits,
        base_seed=args.seed,
        homogeneous=(variant == "baseline"),
    )

    digest = config_hash(model_cfg, train_cfg)
    out = Path(args.out)
    _write_json(
        out / f"metrics-{variant}.json",
        {
            "dataset": str(args.data),
            "variant": variant,
            "backbone": model_cfg.backbone,
            "mode": model_cfg.mode,
            "runs": args.runs,
            "splits": args.splits,
            "split_mode": args.split_mode,
            "base_seed": args.seed,
            "mean_acc": grid.mean_acc,
            "ci95": grid.ci95,
            "per_run": grid.cells,
            "config": resolved_dict(model_cfg, train_cfg),
            "config_hash": digest,
        },
    )

    checkpoint = {
        "config_hash": digest,
        "params": {
            name: {"shape": list(arr.shape), "data": [float(x) for x in arr.ravel()]}
            for name, arr in grid.last_run.params.items()
        },
    }
    _write_json(out / f"checkpoint-{variant}.json", checkpoint)

    betas = grid.last_run.betas
    header = "node_id," + ",".join(f"beta_{k}" for k in range(betas.shape[1]))
    rows = [
        [i] + [_fmt(v) for v in betas[i]]
        for i in range(betas.shape[0])
    ]
    _write_text(out / f"beta-{variant}.csv", _csv_lines(header, rows))

    print(
        f"train[{variant}]: mean test acc {grid.mean_acc:.4f} +/- {grid.ci95:.4f} "
        f"over {len(grid.cells)} cells -> {out}"
    )
    return 0


def _load_beta_csv(path: Path) -> np.ndarray:
    if not path.is_file():
        raise DataError(f"missing weight table {path}")
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().rstrip("\n").split(",")
        if header[:1] != ["node_id"] or len(header) < 2:
            raise DataError(f"{path} line 1: expected header node_id,beta_0,...")
        rows = []
        for lineno, raw in enumerate(handle, start=2):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise DataError(f"{path} line {lineno}: expected {len(header)} fields")
            try:
                rows.append([float(x) for x in parts[1:]])
            except ValueError:
                raise DataError(f"{path} line {lineno}: non-numeric weight") from None
    if not rows:
        raise DataError(f"{path} holds no weight rows")
    return np.asarray(rows)


def cmd_analyze(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    metrics_path = run_dir / f"metrics-{args.variant}.json"
    if not metrics_path.is_file():
        raise DataError(f"missing metrics file {metrics_path}")
    try:
        metrics = json.loads(metrics_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{metrics_path}: invalid JSON ({exc})") from exc
    try:
        model_cfg = DsfConfig(
            **{k: v for k, v in metrics["config"].items() if k in DsfConfig.__dataclass_fields__}
        )
    except (KeyError, TypeError) as exc:
        raise DataError(f"{metrics_path}: unusable embedded config ({exc})") from exc

    weights = _load_beta_csv(run_dir / f"beta-{args.variant}.csv")
    clustering = cluster_weights(weights, k=args.clusters, seed=args.seed)
    grid = np.linspace(0.0, 2.0, args.grid_size)
    curves = centroid_curves(clustering.centroids, model_cfg.basis(), grid)

    out = Path(args.out) if args.out else run_dir
    _write_text(
        out / "clusters.csv",
        _csv_lines("node_id,cluster", enumerate(clustering.labels)),
    )
    rows = []
    for j in range(curves.shape[0]):
        for lam, g in zip(grid, curves[j]):
            rows.append([j, _fmt(lam), _fmt(g)])
    _write_text(out / "centroid_curves.csv", _csv_lines("cluster,lambda,g", rows))
    _write_json(
        out / "analysis.json",
        {
            "variant": args.variant,
            "clusters": args.clusters,
            "grid_size": args.grid_size,
            "seed": args.seed,
            "inertia": clustering.inertia,
            "iterations": clustering.iterations,
            "cluster_sizes": np.bincount(clustering.labels, minlength=args.clusters).tolist(),
            "config_hash": metrics.get("config_hash"),
        },
    )
    print(
        f"analyze: {args.clusters} clusters (inertia {clustering.inertia:.6g}, "
        f"{clustering.iterations} iterations) -> {out}"
    )
    return 0


_PROP1_BASES = ("monomial", "bernstein", "jacobi")


def cmd_prop1_check(args: argparse.Namespace) -> int:
    bases = _PROP1_BASES if args.basis == "all" else (args.basis,)
    order = args.order
    failures = 0
    for name in bases:
        if name == "monomial":
            kind = Monomial()
        elif name == "bernstein":
            kind = Bernstein(order)
        else:
            kind = Jacobi(args.jacobi_a, args.jacobi_b)
        rng = make_rng(args.seed, order, _PROP1_BASES.index(name))
        grid = np.linspace(0.0, 2.0, 64)
        worst = 0.0
        for _ in range(args.trials):
            coefficients = rng.normal(size=order + 1)
            ratio = rng.uniform(0.0, 1.0)
            rescaled = rescale_coefficients(coefficients, ratio, kind)
            direct = filter_response(coefficients, kind, ratio * grid)
            via_rescale = filter_response(rescaled, kind, grid)
            worst = max(worst, float(np.abs(direct - via_rescale).max()))
        status = "PASS" if worst < args.tolerance else "FAIL"
        if status == "FAIL":
            failures += 1
        print(
            f"prop1-check {name} (order {order}, {args.trials} trials): "
            f"max identity error {worst:.3e} < {args.tolerance:.1e}: {status}"
        )
    if failures:
        raise NumericalError(f"{failures} basis/bases violated the rescaling identity")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="diverspec", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diagnose", help="homophily and local-frequency histograms")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--k-hops", type=int, default=2, dest="k_hops")
    p.add_argument("--bands", default="low,mid,high", help="comma list of low,mid,high")
    p.add_argument("--dense-limit", type=int, default=20000, dest="dense_limit")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("train", help="train the runs x splits grid")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--config", required=True, help="flat key=value config file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--splits", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split-mode", choices=("dense", "sparse"), default="dense", dest="split_mode")
    p.add_argument("--mode", choices=("I", "R"), default=None,
                   help="override the config's variant (R pins eta2 to 0)")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--baseline", action="store_true",
                       help="pin every gate to 1 (shared-coefficient backbone)")
    group.add_argument("--no-ipe", action="store_true", dest="no_ipe",
                       help="ablation: train free per-node weights instead of refined positions")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("analyze", help="cluster learned weights, export centroid curves")
    p.add_argument("--run-dir", required=True, dest="run_dir", help="directory written by train")
    p.add_argument("--variant", choices=("dsf", "baseline", "no-ipe"), default="dsf")
    p.add_argument("--clusters", type=int, default=5)
    p.add_argument("--grid-size", type=int, default=101, dest="grid_size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output directory (defaults to run dir)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("prop1-check", help="verify the coefficient-rescaling identity")
    p.add_argument("--basis", choices=_PROP1_BASES + ("all",), default="all")
    p.add_argument("--order", type=int, default=10)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.add_argument("--jacobi-a", type=float, default=1.0, dest="jacobi_a")
    p.add_argument("--jacobi-b", type=float, default=1.0, dest="jacobi_b")
    p.set_defaults(func=cmd_prop1_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "seed", None) is not None and args.seed < 0:
            raise UsageError("--seed must be nonnegative")
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DiverspecError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
