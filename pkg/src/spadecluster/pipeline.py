"""Robust-subset spectral clustering and the experiment harness around it.

The robust pipeline scores every point, clusters only the ``m_nodes`` most
robust ones with ordinary spectral clustering (fresh k-NN graph, fresh
eigendecomposition), then hands each remaining point to the nearest
cluster centroid in the original feature space.
"""

import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .clustering import ClusterAssignment, spectral_clustering
from .dataset import PointSet, load_csv, load_idx, make_blobs
from .eigen import timed
from .errors import ConfigError, ParameterError
from .metrics import acc
from .spade import SpadeReport, robustness_report, select_robust, write_scores

log = logging.getLogger(__name__)

STAGES = ("graph_input", "embed_full_or_subset", "spade", "subset_graph", "subset_eig",
          "kmeans", "assign")


@dataclass(frozen=True)
class RobustClusteringResult:
    full_labels: np.ndarray
    robust_ids: np.ndarray
    robust_assignment: ClusterAssignment
    centroids: np.ndarray
    report: SpadeReport
    timings: dict = field(default_factory=dict, compare=False)

    @property
    def non_robust_ids(self):
        mask = np.ones(self.full_labels.size, dtype=bool)
        mask[self.robust_ids] = False
        return np.flatnonzero(mask)


def centroid_assign(centroids, ps, targets=None):
    """Index of the nearest centroid (Euclidean) for each target row.

    Exact ties go to the lower cluster index. ``targets`` defaults to all
    rows of ``ps``.
    """
    points = ps.points if isinstance(ps, PointSet) else np.asarray(ps, dtype=np.float64)
    centroids = np.asarray(centroids, dtype=np.float64)
    if centroids.ndim != 2 or centroids.shape[1] != points.shape[1]:
        raise ParameterError(
            f"centroids of shape {centroids.shape} do not match points with d={points.shape[1]}"
        )
    if targets is not None:
        points = points[np.asarray(targets, dtype=np.int64)]
    out = np.empty(points.shape[0], dtype=np.int64)
    for i, x in enumerate(points):
        diff = centroids - x
        out[i] = np.argmin(np.einsum("ij,ij->i", diff, diff))
    return out


def robust_spectral_clustering(ps, k_clusters, k_nn=10, m_nodes=None, seed=0, m_eigs=None,
                               k_nn_output=None, metric="euclidean", n_restarts=10,
                               eig_method="auto"):
    """Cluster the ``m_nodes`` most robust points, then assign the rest.

    ``m_nodes`` defaults to N // 3.
    """
    if not isinstance(ps, PointSet):
        ps = PointSet(ps)
    if m_nodes is None:
        m_nodes = max(k_clusters, ps.n // 3)
    if m_nodes < k_clusters:
        raise ParameterError(f"m_nodes={m_nodes} is smaller than k_clusters={k_clusters}")
    if m_nodes > ps.n:
        raise ParameterError(f"m_nodes={m_nodes} exceeds N={ps.n}")

    report, t_spade_total = timed(
        robustness_report, ps, k_nn=k_nn, k_clusters=k_clusters, m_eigs=m_eigs, seed=seed,
        k_nn_output=k_nn_output, metric=metric, eig_method=eig_method,
    )
    robust_ids = select_robust(report, m_nodes)
    sub = ps.subset(robust_ids, name=f"{ps.name}[robust]")
    assignment = spectral_clustering(sub, k_clusters, k_nn=min(k_nn, sub.n - 1), seed=seed,
                                     metric=metric, n_restarts=n_restarts,
                                     eig_method=eig_method)
    centroids = assignment.centroids
    full = np.empty(ps.n, dtype=np.int64)
    full[robust_ids] = assignment.labels
    mask = np.ones(ps.n, dtype=bool)
    mask[robust_ids] = False
    rest = np.flatnonzero(mask)
    assigned, t_assign = timed(centroid_assign, centroids, ps, rest)
    full[rest] = assigned

    rt = report.timings
    timings = {
        "graph_input": rt["graph_input"],
        "embed_full_or_subset": rt["embed"],
        "spade": rt["graph_output"] + rt["generalized_eig"] + rt["scores"],
        "subset_graph": assignment.timings["graph"],
        "subset_eig": assignment.timings["eig"],
        "kmeans": assignment.timings["kmeans"],
        "assign": t_assign,
    }
    timings["total"] = t_spade_total + sum(assignment.timings.values()) + t_assign
    return RobustClusteringResult(full, robust_ids, assignment, centroids, report, timings)


# --- experiment harness ---------------------------------------------------

DATASET_KINDS = ("idx", "csv", "blobs")

# config key -> (attribute, parser)
_CONFIG_KEYS = {
    "dataset.path": ("dataset_path", str),
    "dataset.kind": ("dataset_kind", str),
    "dataset.labels": ("labels_path", str),
    "dataset.label_column": ("label_column", int),
    "dataset.name": ("dataset_name", str),
    "blobs.n_per_cluster": ("blobs_n_per_cluster", int),
    "blobs.d": ("blobs_d", int),
    "blobs.spread": ("blobs_spread", float),
    "blobs.noise_dims": ("blobs_noise_dims", int),
    "k_clusters": ("k_clusters", int),
    "k_nn": ("k_nn", int),
    "k_nn_output": ("k_nn_output", int),
    "m_nodes": ("m_nodes", int),
    "m_eigs": ("m_eigs", int),
    "seed": ("seed", int),
    "output.dir": ("output_dir", str),
}


@dataclass
class ExperimentConfig:
    """Flat ``key = value`` experiment description.

    Recognised keys: ``dataset.path``, ``dataset.kind`` (idx | csv | blobs),
    ``dataset.labels`` (idx label file), ``dataset.label_column`` (csv),
    ``dataset.name``, ``blobs.n_per_cluster``, ``blobs.d``, ``blobs.spread``,
    ``blobs.noise_dims``, ``k_clusters``, ``k_nn``, ``k_nn_output``,
    ``m_nodes``, ``m_eigs``, ``seed``, ``output.dir``. For the blobs kind the
    generator takes ``k_clusters`` clusters and ``seed``.
    """

    dataset_kind: str = "blobs"
    dataset_path: Optional[str] = None
    labels_path: Optional[str] = None
    label_column: Optional[int] = None
    dataset_name: Optional[str] = None
    blobs_n_per_cluster: int = 200
    blobs_d: int = 2
    blobs_spread: float = 0.08
    blobs_noise_dims: int = 0
    k_clusters: int = 10
    k_nn: int = 10
    k_nn_output: Optional[int] = None
    m_nodes: Optional[int] = None
    m_eigs: Optional[int] = None
    seed: int = 0
    output_dir: Optional[str] = None

    @classmethod
    def from_file(cls, path):
        path = Path(path)
        if not path.is_file():
            raise ConfigError([f"config: file {str(path)!r} does not exist"])
        return cls.from_text(path.read_text(encoding="utf-8"), base_dir=path.parent)

    @classmethod
    def from_text(cls, text, base_dir=None):
        values, errors = {}, []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                errors.append(f"line {lineno}: expected 'key = value'")
                continue
            key, raw = (s.strip() for s in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                errors.append(f"{key}: unknown key")
                continue
            attr, conv = _CONFIG_KEYS[key]
            try:
                values[attr] = conv(raw)
            except ValueError:
                errors.append(f"{key}: cannot parse {raw!r} as {conv.__name__}")
        if errors:
            raise ConfigError(errors)
        cfg = cls(**values)
        if base_dir is not None:
            for attr in ("dataset_path", "labels_path", "output_dir"):
                v = getattr(cfg, attr)
                if v is not None and not Path(v).is_absolute():
                    setattr(cfg, attr, str(Path(base_dir) / v))
        return cfg

    def validate(self, n_points=None):
        """Raise ConfigError listing every invalid field."""
        errors = []
        if self.dataset_kind not in DATASET_KINDS:
            errors.append(f"dataset.kind: must be one of {DATASET_KINDS}, got {self.dataset_kind!r}")
        if self.dataset_kind in ("idx", "csv"):
            if not self.dataset_path:
                errors.append("dataset.path: required for idx/csv datasets")
            elif not Path(self.dataset_path).is_file():
                errors.append(f"dataset.path: file {self.dataset_path!r} does not exist")
        if self.labels_path and not Path(self.labels_path).is_file():
            errors.append(f"dataset.labels: file {self.labels_path!r} does not exist")
        for key, attr in (("k_clusters", "k_clusters"), ("k_nn", "k_nn"),
                          ("blobs.n_per_cluster", "blobs_n_per_cluster"), ("blobs.d", "blobs_d")):
            if getattr(self, attr) < 1:
                errors.append(f"{key}: must be >= 1")
        for key, attr in (("m_nodes", "m_nodes"), ("m_eigs", "m_eigs"),
                          ("k_nn_output", "k_nn_output")):
            v = getattr(self, attr)
            if v is not None and v < 1:
                errors.append(f"{key}: must be >= 1")
        if self.blobs_spread <= 0:
            errors.append("blobs.spread: must be positive")
        if self.blobs_noise_dims < 0:
            errors.append("blobs.noise_dims: must be >= 0")
        if self.m_nodes is not None and self.m_nodes < self.k_clusters:
            errors.append(f"m_nodes: {self.m_nodes} is smaller than k_clusters={self.k_clusters}")
        if n_points is not None:
            if self.m_nodes is not None and self.m_nodes > n_points:
                errors.append(f"m_nodes: {self.m_nodes} exceeds the {n_points} points")
            if self.k_nn >= n_points:
                errors.append(f"k_nn: {self.k_nn} must be below the {n_points} points")
        if errors:
            raise ConfigError(errors)

    def load(self):
        if self.dataset_kind == "idx":
            return load_idx(self.dataset_path, self.labels_path, name=self.dataset_name)
        if self.dataset_kind == "csv":
            return load_csv(self.dataset_path, self.label_column, name=self.dataset_name)
        ps = make_blobs(self.blobs_n_per_cluster, self.k_clusters, self.blobs_d,
                        self.blobs_spread, self.blobs_noise_dims, self.seed)
        if self.dataset_name:
            ps = PointSet(ps.points, ps.labels, self.dataset_name, ps.meta)
        return ps


@dataclass
class ExperimentReport:
    """Baseline vs. robust comparison for one dataset.

    ``eig_time_full`` is the baseline clustering eigendecomposition,
    ``eig_time_subset`` the robust-subset one and ``speedup`` their ratio.
    ``eig_time_spade`` is the full-size solve inside scoring, reported
    separately because it is part of the robust pipeline's total cost.
    """

    dataset: str
    n: int
    d: int
    k_clusters: int
    k_nn: int
    m_nodes: int
    m_eigs: int
    seed: int
    eig_time_full: float
    eig_time_subset: float
    speedup: float
    eig_time_spade: float
    total_time_baseline: float
    total_time_robust: float
    acc_baseline: Optional[float] = None
    acc_robust: Optional[float] = None
    timings: dict = field(default_factory=dict)

    _INT = ("n", "d", "k_clusters", "k_nn", "m_nodes", "m_eigs", "seed")
    _FLOAT = ("acc_baseline", "acc_robust", "eig_time_full", "eig_time_subset", "speedup",
              "eig_time_spade", "total_time_baseline", "total_time_robust")

    def to_text(self):
        """``key=value`` lines in a fixed order; absent ACC fields are omitted."""
        lines = [f"dataset={self.dataset}"]
        for name in self._INT:
            lines.append(f"{name}={getattr(self, name)}")
        for name in self._FLOAT:
            v = getattr(self, name)
            if v is not None:
                lines.append(f"{name}={float(v)!r}")
        for stage, secs in self.timings.items():
            lines.append(f"time.{stage}={float(secs)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        kw, timings = {}, {}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, value = line.split("=", 1)
            if key.startswith("time."):
                timings[key[5:]] = float(value)
            elif key == "dataset":
                kw[key] = value
            elif key in cls._INT:
                kw[key] = int(value)
            elif key in cls._FLOAT:
                kw[key] = float(value)
            else:
                raise ValueError(f"unknown report field {key!r}")
        return cls(timings=timings, **kw)

    def timing_free(self):
        """Copy with every timing-derived field zeroed, for determinism checks."""
        out = ExperimentReport(**{f.name: getattr(self, f.name) for f in fields(self)})
        for name in ("eig_time_full", "eig_time_subset", "speedup", "eig_time_spade",
                     "total_time_baseline", "total_time_robust"):
            setattr(out, name, 0.0)
        out.timings = {k: 0.0 for k in self.timings}
        return out


def run_experiment(config, ps=None):
    """Run plain and robust spectral clustering under the same seed.

    Writes ``report.txt``, ``scores.csv`` (plus eigenvalue sidecar) and
    ``labels.csv`` to ``config.output_dir`` when it is set.
    """
    config.validate()
    if ps is None:
        ps = config.load()
    config.validate(n_points=ps.n)
    m_nodes = config.m_nodes if config.m_nodes is not None else max(config.k_clusters, ps.n // 3)
    m_eigs = config.m_eigs if config.m_eigs is not None else config.k_clusters

    log.info("baseline spectral clustering on %s (N=%d, d=%d)", ps.name, ps.n, ps.d)
    base, t_base = timed(spectral_clustering, ps, config.k_clusters, k_nn=config.k_nn,
                         seed=config.seed)
    log.info("robust pipeline with m_nodes=%d", m_nodes)
    robust = robust_spectral_clustering(ps, config.k_clusters, k_nn=config.k_nn, m_nodes=m_nodes,
                                        seed=config.seed, m_eigs=m_eigs,
                                        k_nn_output=config.k_nn_output)
    eig_full = base.timings["eig"]
    eig_subset = robust.timings["subset_eig"]
    report = ExperimentReport(
        dataset=ps.name, n=ps.n, d=ps.d, k_clusters=config.k_clusters, k_nn=config.k_nn,
        m_nodes=m_nodes, m_eigs=m_eigs, seed=config.seed,
        eig_time_full=eig_full, eig_time_subset=eig_subset,
        speedup=eig_full / eig_subset if eig_subset > 0 else float("inf"),
        eig_time_spade=robust.report.timings["embed"] + robust.report.timings["generalized_eig"],
        total_time_baseline=t_base, total_time_robust=robust.timings["total"],
        timings={k: v for k, v in robust.timings.items() if k != "total"},
    )
    if ps.labels is not None:
        report.acc_baseline = acc(base.labels, ps.labels)
        report.acc_robust = acc(robust.full_labels, ps.labels)
    if config.output_dir:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
        write_scores(robust.report, out / "scores.csv")
        np.savetxt(out / "labels.csv", np.column_stack([base.labels, robust.full_labels]),
                   fmt="%d", delimiter=",", header="baseline,robust", comments="")
    return report
