"""Command-line front end.

    spadecluster run --config exp.cfg [--seed N] [--output DIR] [--k-nn K] [--m-nodes M] [--m-eigs E]
    spadecluster replicate {usps,mnist,blobs-demo} [--data DIR] [overrides]
    spadecluster score --dataset PATH [--kind csv|idx] [--labels PATH] ... --output DIR
    spadecluster bench-eig [--sizes 500,1000,2000] [--output DIR]

Exit status: 0 on success, 2 for configuration or argument errors, 1 for
runtime failures.
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .dataset import load_csv, load_idx, make_blobs
from .eigen import dense_eig_oracle, timed
from .errors import ConfigError
from .graph import build_knn_graph, laplacian, write_edgelist
from .pipeline import ExperimentConfig, ExperimentReport, run_experiment
from .spade import robustness_report, write_scores

log = logging.getLogger("spadecluster")

# operating points used for the published comparison
PRESETS = {
    "usps": {"k_clusters": 10, "k_nn": 10, "m_nodes": 2000},
    "mnist": {"k_clusters": 10, "k_nn": 10, "m_nodes": 1500},
    "blobs-demo": {"k_clusters": 3, "k_nn": 10, "m_nodes": 200},
}

MNIST_FILES = ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")


def _pct(x):
    return "n/a" if x is None else f"{100.0 * x:.2f}"


def format_report(report, style="human"):
    """Render a report as a two-row comparison table or as ``key=value`` text."""
    if style == "machine":
        return report.to_text()
    if style != "human":
        raise ValueError(f"unknown style {style!r}")
    lines = [
        f"dataset {report.dataset}: N={report.n} d={report.d} k_clusters={report.k_clusters} "
        f"k_nn={report.k_nn} m_nodes={report.m_nodes} m_eigs={report.m_eigs} seed={report.seed}",
        f"{'method':<10} {'ACC (%)':>8} {'eig time (s)':>13}",
        f"{'baseline':<10} {_pct(report.acc_baseline):>8} {report.eig_time_full:>13.4f}",
        f"{'robust':<10} {_pct(report.acc_robust):>8} {report.eig_time_subset:>13.4f}",
        f"eigendecomposition speedup {report.speedup:.2f}x "
        f"(scoring solve {report.eig_time_spade:.4f}s; end-to-end baseline "
        f"{report.total_time_baseline:.2f}s, robust {report.total_time_robust:.2f}s)",
    ]
    return "\n".join(lines) + "\n"


def _add_overrides(p):
    p.add_argument("--seed", type=int)
    p.add_argument("--output", help="directory for report, scores and labels")
    p.add_argument("--k-nn", type=int, dest="k_nn")
    p.add_argument("--m-nodes", type=int, dest="m_nodes")
    p.add_argument("--m-eigs", type=int, dest="m_eigs")
    p.add_argument("--style", choices=("human", "machine"), default="human")


def _parser():
    parser = argparse.ArgumentParser(prog="spadecluster", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment from a config file")
    p.add_argument("--config", required=True)
    _add_overrides(p)

    p = sub.add_parser("replicate", help="run a preset operating point")
    p.add_argument("preset", choices=sorted(PRESETS))
    p.add_argument("--data", default=".", help="directory holding the dataset files")
    p.add_argument("--label-column", type=int, default=-1, help="USPS CSV label column")
    _add_overrides(p)

    p = sub.add_parser("score", help="write per-node robustness scores")
    p.add_argument("--dataset", required=True)
    p.add_argument("--kind", choices=("csv", "idx"), default="csv")
    p.add_argument("--labels", help="IDX label file")
    p.add_argument("--label-column", type=int)
    p.add_argument("--k-clusters", type=int, default=10, dest="k_clusters")
    p.add_argument("--k-nn", type=int, default=10, dest="k_nn")
    p.add_argument("--m-eigs", type=int, dest="m_eigs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.add_argument("--dump-graph", action="store_true", help="also write the input k-NN edge list")

    p = sub.add_parser("bench-eig", help="time dense Laplacian eigendecompositions")
    p.add_argument("--sizes", default="500,1000,2000")
    p.add_argument("--k-nn", type=int, default=10, dest="k_nn")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    return parser


def _apply_overrides(cfg, args):
    for attr in ("seed", "k_nn", "m_nodes", "m_eigs"):
        v = getattr(args, attr, None)
        if v is not None:
            setattr(cfg, attr, v)
    if getattr(args, "output", None):
        cfg.output_dir = args.output
    return cfg


def _find(data_dir, stem):
    for name in (stem, stem + ".gz"):
        path = Path(data_dir) / name
        if path.is_file():
            return path
    return None


def _preset_config(args):
    preset = PRESETS[args.preset]
    if args.preset == "blobs-demo":
        cfg = ExperimentConfig(dataset_kind="blobs", blobs_n_per_cluster=200, blobs_d=2,
                               blobs_spread=0.08, blobs_noise_dims=6, seed=3,
                               dataset_name="blobs-demo", **preset)
    elif args.preset == "usps":
        path = _find(args.data, "usps.csv")
        if path is None:
            raise ConfigError([f"dataset.path: no usps.csv in {args.data!r}"])
        cfg = ExperimentConfig(dataset_kind="csv", dataset_path=str(path),
                               label_column=args.label_column, dataset_name="usps", **preset)
    else:
        images, labels = (_find(args.data, f) for f in MNIST_FILES)
        errors = [f"dataset.path: no {f}[.gz] in {args.data!r}"
                  for f, p in zip(MNIST_FILES, (images, labels)) if p is None]
        if errors:
            raise ConfigError(errors)
        cfg = ExperimentConfig(dataset_kind="idx", dataset_path=str(images),
                               labels_path=str(labels), dataset_name="mnist-test", **preset)
    return _apply_overrides(cfg, args)


def _emit(report, args):
    sys.stdout.write(format_report(report, args.style))


def _cmd_run(args):
    cfg = _apply_overrides(ExperimentConfig.from_file(args.config), args)
    _emit(run_experiment(cfg), args)


def _cmd_replicate(args):
    _emit(run_experiment(_preset_config(args)), args)


def _cmd_score(args):
    if not Path(args.dataset).is_file():
        raise ConfigError([f"--dataset: file {args.dataset!r} does not exist"])
    if args.kind == "idx":
        ps = load_idx(args.dataset, args.labels)
    else:
        ps = load_csv(args.dataset, args.label_column)
    report = robustness_report(ps, k_nn=args.k_nn, k_clusters=args.k_clusters,
                               m_eigs=args.m_eigs, seed=args.seed)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    write_scores(report, out / "scores.csv")
    if args.dump_graph:
        write_edgelist(build_knn_graph(ps, args.k_nn), out / "graph_input.txt")
    print(f"wrote {out / 'scores.csv'} ({ps.n} nodes)")


def _cmd_bench(args):
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise ConfigError([f"--sizes: cannot parse {args.sizes!r}"]) from None
    if not sizes or min(sizes) <= args.k_nn:
        raise ConfigError(["--sizes: every size must exceed --k-nn"])
    rows = []
    for n in sizes:
        ps = make_blobs(-(-n // 10), 10, 10, 0.3, 0, args.seed).subset(np.arange(n))
        dense = laplacian(build_knn_graph(ps, args.k_nn)).toarray()
        _, secs = timed(dense_eig_oracle, dense)
        rows.append((n, secs))
    base = rows[0][1]
    text = "n,seconds,ratio_to_first\n" + "".join(
        f"{n},{secs:.6f},{secs / base:.3f}\n" for n, secs in rows
    )
    sys.stdout.write(text)
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        (out / "bench_eig.csv").write_text(text, encoding="utf-8")


COMMANDS = {"run": _cmd_run, "replicate": _cmd_replicate, "score": _cmd_score,
            "bench-eig": _cmd_bench}


def main(argv=None):
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"error: {msg}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report and map to exit status 1
        log.debug("failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


__all__ = ["main", "format_report", "ExperimentReport"]
