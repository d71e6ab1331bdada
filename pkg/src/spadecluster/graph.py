"""k-NN graphs, their Laplacians and connected components."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc

from .dataset import PointSet
from .errors import ParameterError

METRICS = ("euclidean", "cosine")

# rows of the distance matrix computed per block
_BLOCK = 512


@dataclass(frozen=True)
class NeighborGraph:
    """Undirected weighted graph over ``n`` nodes.

    ``edges`` holds (i, j) pairs with i < j, sorted; ``weights`` the matching
    positive weights. ``adjacency`` is the symmetric CSR weight matrix with
    sorted column indices. ``knn`` is the directed (n, k) neighbour table the
    graph was symmetrized from, or None for graphs built from edge lists.
    """

    n: int
    edges: np.ndarray
    weights: np.ndarray
    adjacency: sp.csr_matrix
    knn: Optional[np.ndarray] = None

    @classmethod
    def from_edges(cls, n, edges, weights=None, knn=None):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if weights is None:
            weights = np.ones(len(edges))
        weights = np.asarray(weights, dtype=np.float64)
        if len(weights) != len(edges):
            raise ParameterError("weights and edges differ in length")
        if len(edges) and (edges.min() < 0 or edges.max() >= n):
            raise ParameterError("edge endpoint outside 0..n-1")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise ParameterError("self-loops are not allowed")
        if np.any(weights <= 0):
            raise ParameterError("edge weights must be positive")
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        order = np.lexsort((hi, lo))
        lo, hi, weights = lo[order], hi[order], weights[order]
        if len(lo) > 1 and np.any((np.diff(lo) == 0) & (np.diff(hi) == 0)):
            raise ParameterError("duplicate edges")
        w = sp.coo_matrix(
            (np.concatenate([weights, weights]), (np.concatenate([lo, hi]), np.concatenate([hi, lo]))),
            shape=(n, n),
        ).tocsr()
        w.sort_indices()
        edges = np.column_stack([lo, hi])
        for arr in (edges, weights):
            arr.setflags(write=False)
        return cls(int(n), edges, weights, w, knn)

    @property
    def k(self):
        return None if self.knn is None else self.knn.shape[1]

    def neighbors(self, i):
        """Sorted neighbour ids of node ``i`` in the symmetrized graph."""
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]]

    def degrees(self):
        return np.diff(self.adjacency.indptr)


def _as_points(data):
    if isinstance(data, PointSet):
        return data.points
    pts = np.asarray(data, dtype=np.float64)
    if pts.ndim != 2:
        raise ParameterError(f"expected a 2-D point array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ParameterError("points contain NaN or Inf")
    return pts


def knn_search(points, k, metric="euclidean"):
    """Brute-force k nearest neighbours of every row, excluding itself.

    Returns an (N, k) int array ordered by increasing distance, ties broken
    by lower node index. Cosine distance is ranked as Euclidean distance
    between unit-normalized rows (a monotone transform of 1 - cos).
    """
    x = _as_points(points)
    n = x.shape[0]
    if metric not in METRICS:
        raise ParameterError(f"metric must be one of {METRICS}, got {metric!r}")
    if int(k) != k or k < 1:
        raise ParameterError(f"k must be a positive integer, got {k}")
    if k >= n:
        raise ParameterError(f"k={k} must be smaller than the number of points N={n}")
    if metric == "cosine":
        norms = np.linalg.norm(x, axis=1)
        if np.any(norms == 0):
            raise ParameterError("cosine metric undefined for zero vectors")
        x = x / norms[:, None]
    sq = np.einsum("ij,ij->i", x, x)
    out = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * (x[start:stop] @ x.T)
        np.maximum(d2, 0.0, out=d2)
        rows = np.arange(stop - start)
        d2[rows, rows + start] = np.inf
        kth = np.partition(d2, k - 1, axis=1)[:, k - 1]
        # the Gram-trick distances carry rounding error; re-rank a slightly
        # widened candidate set with exact differences so ties are honest
        slack = 1e-9 * (kth + sq[start:stop] + sq.max()) + 1e-300
        for r in rows:
            cand = np.flatnonzero(d2[r] <= kth[r] + slack[r])
            diff = x[cand] - x[start + r]
            exact = np.einsum("ij,ij->i", diff, diff)
            order = np.lexsort((cand, exact))
            out[start + r] = cand[order[:k]]
    return out


def build_knn_graph(data, k, metric="euclidean"):
    """Union-symmetrized k-NN graph with binary weights.

    ``data`` is a PointSet or an (N, d) array. Edge (i, j) exists when j is
    among the k nearest neighbours of i or vice versa.
    """
    knn = knn_search(data, k, metric)
    n = knn.shape[0]
    src = np.repeat(np.arange(n), knn.shape[1])
    dst = knn.ravel()
    lo, hi = np.minimum(src, dst), np.maximum(src, dst)
    pairs = np.unique(np.column_stack([lo, hi]), axis=0)
    knn.setflags(write=False)
    return NeighborGraph.from_edges(n, pairs, knn=knn)


def laplacian(g):
    """Unnormalized Laplacian L = D - W as a CSR matrix."""
    w = g.adjacency
    deg = np.asarray(w.sum(axis=1)).ravel()
    lap = (sp.diags(deg) - w).tocsr()
    lap.sort_indices()
    return lap


def connected_components(g):
    """Component id per node, ids dense and ordered by smallest member."""
    _, raw = _cc(g.adjacency, directed=False)
    _, first = np.unique(raw, return_index=True)
    # rank components by the first node at which they appear
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    return rank[raw]


def component_indicators(labels):
    """Unit-norm indicator vectors of each component, as an (n, C) array."""
    n_comp = int(labels.max()) + 1
    u = np.zeros((labels.size, n_comp))
    u[np.arange(labels.size), labels] = 1.0
    return u / np.sqrt(u.sum(axis=0))


def write_edgelist(g, path):
    """Dump edges as ``i j w`` lines sorted by (i, j)."""
    with open(path, "w", encoding="utf-8") as fh:
        for (i, j), w in zip(g.edges, g.weights):
            fh.write(f"{i} {j} {float(w)!r}\n")


def read_edgelist(path, n):
    data = np.loadtxt(path, ndmin=2)
    if data.size == 0:
        return NeighborGraph.from_edges(n, np.empty((0, 2), dtype=np.int64))
    return NeighborGraph.from_edges(n, data[:, :2].astype(np.int64), data[:, 2])
