"""Point sets: IDX/CSV loaders and a synthetic blob generator."""

import csv
import gzip
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConsistencyError, FormatError, ParameterError, ParseError, TruncatedError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass(frozen=True)
class PointSet:
    """N x d feature matrix with optional dense labels in 0..C-1.

    Arrays are stored read-only so a PointSet can be shared between workers.
    ``meta`` carries loader details such as the original label values.
    """

    points: np.ndarray
    labels: Optional[np.ndarray] = None
    name: str = "points"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ParameterError(f"points must be a non-empty 2-D array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ParameterError("points contain NaN or Inf")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.array(self.labels, copy=True)
            if lab.ndim != 1 or lab.shape[0] != pts.shape[0]:
                raise ParameterError(f"labels length {lab.shape} does not match N={pts.shape[0]}")
            if not np.issubdtype(lab.dtype, np.integer):
                raise ParameterError("labels must be integers")
            lab = lab.astype(np.int64)
            if lab.min() < 0:
                raise ParameterError("labels must be non-negative")
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]

    @property
    def n_classes(self):
        return None if self.labels is None else int(self.labels.max()) + 1

    def subset(self, ids, name=None):
        """Rows ``ids`` as a new PointSet (labels follow)."""
        ids = np.asarray(ids, dtype=np.int64)
        labels = None if self.labels is None else self.labels[ids]
        return PointSet(self.points[ids], labels, name or f"{self.name}[subset]", dict(self.meta))


def _open(path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_idx(path, expected_magic):
    with _open(path) as fh:
        raw = fh.read()
    if len(raw) < 4:
        raise TruncatedError(f"{path}: file shorter than the 4-byte magic number")
    (magic,) = struct.unpack(">I", raw[:4])
    if magic != expected_magic:
        raise FormatError(f"{path}: magic 0x{magic:08x}, expected 0x{expected_magic:08x}")
    ndim = magic & 0xFF
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise TruncatedError(f"{path}: header truncated")
    dims = struct.unpack(">" + "I" * ndim, raw[4:header])
    expected = int(np.prod(dims, dtype=np.int64))
    payload = len(raw) - header
    if payload < expected:
        raise TruncatedError(f"{path}: payload has {payload} bytes, header promises {expected}")
    data = np.frombuffer(raw, dtype=np.uint8, count=expected, offset=header)
    return data.reshape(dims)


def load_idx(images_path, labels_path=None, name=None):
    """Load an IDX image file (optionally gzipped) and its label file.

    Pixels are flattened row-major and scaled from 0..255 to [0, 1].
    """
    images = _read_idx(images_path, IDX_IMAGES_MAGIC)
    points = images.reshape(images.shape[0], -1).astype(np.float64) / 255.0
    labels = None
    meta = {"source": str(images_path), "image_shape": tuple(int(s) for s in images.shape[1:])}
    if labels_path is not None:
        raw_labels = _read_idx(labels_path, IDX_LABELS_MAGIC)
        if raw_labels.shape[0] != points.shape[0]:
            raise ConsistencyError(
                f"{raw_labels.shape[0]} labels for {points.shape[0]} images"
            )
        labels, values = _dense_encode(raw_labels.tolist())
        meta["label_values"] = values
    return PointSet(points, labels, name or Path(images_path).name, meta)


def _dense_encode(values):
    """Map labels to 0..C-1 in first-seen order."""
    codes = {}
    out = np.empty(len(values), dtype=np.int64)
    for i, v in enumerate(values):
        out[i] = codes.setdefault(v, len(codes))
    return out, list(codes)


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path, label_column=None, name=None):
    """Read a numeric CSV; a non-numeric first row is treated as a header.

    ``label_column`` may be negative (Python indexing). Labels are re-encoded
    to 0..C-1 in first-seen order; originals are kept in ``meta["label_values"]``.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise FormatError(f"{path}: empty file")
    header = None
    if not all(_is_number(c) for c in rows[0]):
        header, rows = rows[0], rows[1:]
        if not rows:
            raise FormatError(f"{path}: header only, no data rows")
    width = len(rows[0])
    for lineno, row in enumerate(rows, start=2 if header else 1):
        if len(row) != width:
            raise FormatError(f"{path}:{lineno}: expected {width} columns, got {len(row)}")
    col = None
    if label_column is not None:
        col = label_column % width if -width <= label_column < width else None
        if col is None:
            raise ParameterError(f"label_column {label_column} out of range for width {width}")
    feature_cols = [c for c in range(width) if c != col]
    if not feature_cols:
        raise FormatError(f"{path}: no feature columns")
    points = np.empty((len(rows), len(feature_cols)))
    for r, row in enumerate(rows):
        for j, c in enumerate(feature_cols):
            try:
                points[r, j] = float(row[c])
            except ValueError:
                raise ParseError(f"{path}: row {r + 1}, column {c}: {row[c]!r} is not numeric") from None
    meta = {"source": str(path)}
    if header is not None:
        meta["header"] = header
    labels = None
    if col is not None:
        raw = [row[col].strip() for row in rows]
        # "1" and "1.0" should be the same class
        raw = [_canonical_label(v) for v in raw]
        labels, values = _dense_encode(raw)
        meta["label_values"] = values
    return PointSet(points, labels, name or Path(path).stem, meta)


def _canonical_label(cell):
    try:
        x = float(cell)
    except ValueError:
        return cell
    return int(x) if x.is_integer() else x


def write_csv(ps, path, with_labels=True):
    """Write points (and labels as the last column) with round-trip precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for i, row in enumerate(ps.points):
            cells = [repr(float(x)) for x in row]
            if with_labels and ps.labels is not None:
                cells.append(str(int(ps.labels[i])))
            writer.writerow(cells)


def make_blobs(n_per_cluster, k_clusters, d, spread, noise_dims=0, seed=0):
    """Isotropic Gaussian clusters plus optional pure-noise coordinates.

    Cluster ``c`` is centred at ``(1 + c // d) * e_(c mod d)``: unit vectors
    along the coordinate axes, pushed out by one unit per wrap when
    ``k_clusters > d``. ``noise_dims`` standard-normal columns are appended.
    """
    for nm, v in (("n_per_cluster", n_per_cluster), ("k_clusters", k_clusters), ("d", d)):
        if int(v) != v or v < 1:
            raise ParameterError(f"{nm} must be a positive integer, got {v}")
    if spread <= 0:
        raise ParameterError(f"spread must be positive, got {spread}")
    if int(noise_dims) != noise_dims or noise_dims < 0:
        raise ParameterError(f"noise_dims must be a non-negative integer, got {noise_dims}")
    rng = np.random.default_rng(seed)
    means = np.zeros((k_clusters, d))
    for c in range(k_clusters):
        means[c, c % d] = 1.0 + c // d
    labels = np.repeat(np.arange(k_clusters), n_per_cluster)
    signal = means[labels] + spread * rng.standard_normal((labels.size, d))
    noise = rng.standard_normal((labels.size, noise_dims))
    points = np.hstack([signal, noise])
    name = f"blobs-{k_clusters}x{n_per_cluster}-d{d}-s{spread}-nd{noise_dims}-seed{seed}"
    return PointSet(points, labels, name, {"means": means})
