"""Per-node robustness scores from input/embedding manifold distortion.

A node's score averages, over its neighbours in the input k-NN graph, the
squared distance between the two endpoints' rows of the scaled eigensubspace
matrix ``V = [v_1 sqrt(l_1), ..., v_m sqrt(l_m)]``, where ``(l_j, v_j)`` are
the top eigenpairs of ``pinv(L_output) @ L_input``. Low scores mark nodes
whose neighbourhoods the embedding preserves; those are the robust ones.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .clustering import spectral_embed
from .dataset import PointSet
from .eigen import generalized_top_eigenpairs, timed
from .errors import ContractError, NumericalError, ParameterError
from .graph import build_knn_graph, laplacian


@dataclass(frozen=True)
class SpadeReport:
    scores: np.ndarray
    vk: np.ndarray
    eigenvalues: np.ndarray
    ranking: np.ndarray
    timings: dict = field(default_factory=dict, compare=False)

    @property
    def ranks(self):
        """Position of every node in ``ranking`` (0 = most robust)."""
        r = np.empty_like(self.ranking)
        r[self.ranking] = np.arange(self.ranking.size)
        return r


def build_vk(pairs):
    if np.any(pairs.values < 0):
        raise NumericalError(f"negative eigenvalue {pairs.values.min():.3e} in scaled subspace")
    return pairs.vectors * np.sqrt(pairs.values)[None, :]


def spade_scores(g_input, vk):
    """Mean of ``||vk[i] - vk[j]||^2`` over the symmetrized neighbours j of i."""
    vk = np.asarray(vk, dtype=np.float64)
    if vk.ndim == 1:
        vk = vk[:, None]
    if vk.shape[0] != g_input.n:
        raise ParameterError(f"vk has {vk.shape[0]} rows for a graph on {g_input.n} nodes")
    deg = g_input.degrees()
    isolated = np.flatnonzero(deg == 0)
    if isolated.size:
        raise ContractError(f"node {isolated[0]} has no neighbours", node=int(isolated[0]))
    adj = g_input.adjacency
    rows = np.repeat(np.arange(g_input.n), deg)
    diff = vk[rows] - vk[adj.indices]
    per_edge = np.einsum("ij,ij->i", diff, diff)
    return np.bincount(rows, weights=per_edge, minlength=g_input.n) / deg


def rank_nodes(scores):
    """Node ids by ascending score, ties kept in id order."""
    return np.argsort(scores, kind="stable")


def robustness_report(ps, k_nn=10, k_clusters=10, m_eigs=None, seed=0, k_nn_output=None,
                      metric="euclidean", zero_tol=1e-8, eig_method="auto"):
    """Score every point of ``ps``.

    ``m_eigs`` defaults to ``k_clusters`` and ``k_nn_output`` (neighbours in
    the embedded space) to ``k_nn``.
    """
    if not isinstance(ps, PointSet):
        ps = PointSet(ps)
    m_eigs = k_clusters if m_eigs is None else m_eigs
    k_nn_output = k_nn if k_nn_output is None else k_nn_output
    g_in, t_gin = timed(build_knn_graph, ps, k_nn, metric)
    dim = min(k_clusters, ps.n - 1)
    emb, t_emb = timed(spectral_embed, g_in, dim, zero_tol=zero_tol, method=eig_method,
                       seed=seed, component_contrasts=True)
    g_out, t_gout = timed(build_knn_graph, emb.coords, k_nn_output)
    pairs, t_gen = timed(generalized_top_eigenpairs, laplacian(g_in), laplacian(g_out), m_eigs,
                         zero_tol=zero_tol, method=eig_method, seed=seed)
    vk = build_vk(pairs)
    scores, t_sc = timed(spade_scores, g_in, vk)
    timings = {
        "graph_input": t_gin,
        "embed": t_emb,
        "graph_output": t_gout,
        "generalized_eig": t_gen,
        "scores": t_sc,
    }
    return SpadeReport(scores, vk, pairs.values, rank_nodes(scores), timings)


def select_robust(report, m_nodes):
    """The ``m_nodes`` lowest-scoring node ids, sorted by id."""
    n = report.ranking.size
    if int(m_nodes) != m_nodes or m_nodes < 1:
        raise ParameterError(f"m_nodes must be a positive integer, got {m_nodes}")
    if m_nodes > n:
        raise ParameterError(f"m_nodes={m_nodes} exceeds N={n}")
    return np.sort(report.ranking[:m_nodes])


def write_scores(report, path):
    """Write ``node_id,score,rank`` rows and a ``.eigenvalues.txt`` sidecar.

    Returns the sidecar path.
    """
    path = Path(path)
    ranks = report.ranks
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node_id,score,rank\n")
        for i, s in enumerate(report.scores):
            fh.write(f"{i},{float(s)!r},{int(ranks[i])}\n")
    sidecar = path.with_suffix(".eigenvalues.txt")
    with open(sidecar, "w", encoding="utf-8") as fh:
        for v in report.eigenvalues:
            fh.write(f"{float(v)!r}\n")
    return sidecar


def read_scores(path):
    """Inverse of ``write_scores``: (scores, ranks, eigenvalues)."""
    path = Path(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    order = np.argsort(data[:, 0])
    data = data[order]
    eig = np.loadtxt(path.with_suffix(".eigenvalues.txt"), ndmin=1)
    return data[:, 1], data[:, 2].astype(np.int64), eig
