"""Unnormalized spectral clustering and a seeded k-means."""

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import PointSet
from .eigen import bottom_nonzero_eigenpairs, timed
from .errors import ParameterError, RankError
from .graph import build_knn_graph, connected_components, laplacian


@dataclass(frozen=True)
class ClusterAssignment:
    """Labels in 0..k-1 with per-cluster centroids.

    ``inertia`` is measured in the space k-means ran in, which for spectral
    clustering is the embedding, while ``centroids`` may be reported in the
    original feature space. ``timings`` maps stage name to wall seconds.
    """

    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    seed: int
    n_iter: int = 0
    timings: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class Embedding:
    coords: np.ndarray
    source_eigenvalues: np.ndarray


def spectral_embed(g, k, zero_tol=1e-8, method="auto", seed=0, component_contrasts=False):
    """Rows of the k bottom nonzero Laplacian eigenvectors, no row scaling.

    With ``component_contrasts`` the nullspace is not discarded wholesale:
    only the global constant direction is dropped, so a graph with C
    components contributes C - 1 orthonormal indicator contrasts (largest
    components first) ahead of the nonzero eigenvectors. On a connected
    graph both modes agree.
    """
    lap = laplacian(g)
    if not component_contrasts:
        pairs = bottom_nonzero_eigenpairs(lap, k, zero_tol=zero_tol, method=method, seed=seed)
        return Embedding(pairs.vectors, pairs.values)
    comp = connected_components(g)
    n_comp = int(comp.max()) + 1
    if k > g.n - 1:
        raise RankError(f"at most {g.n - 1} embedding columns exist, {k} requested",
                        n_components=n_comp)
    contrasts = _contrast_basis(comp, n_comp)[:, :k]
    n_rest = k - contrasts.shape[1]
    if n_rest == 0:
        return Embedding(contrasts, np.zeros(k))
    pairs = bottom_nonzero_eigenpairs(lap, n_rest, zero_tol=zero_tol, method=method, seed=seed)
    coords = np.hstack([contrasts, pairs.vectors])
    return Embedding(coords, np.concatenate([np.zeros(contrasts.shape[1]), pairs.values]))


def _contrast_basis(comp, n_comp):
    # orthonormalize [1, indicators by decreasing size] and drop the constant
    sizes = np.bincount(comp, minlength=n_comp)
    order = np.lexsort((np.arange(n_comp), -sizes))
    ind = np.zeros((comp.size, n_comp))
    ind[:, 0] = 1.0
    # the smallest component is implied by the constant column
    for rank, c in enumerate(order[:-1]):
        ind[comp == c, rank + 1] = 1.0
    q, _ = np.linalg.qr(ind)
    q = q[:, 1:]
    idx = np.argmax(np.abs(q), axis=0)
    return q * np.sign(q[idx, np.arange(q.shape[1])])


def _sq_dists(points, centroids):
    d2 = (
        np.einsum("ij,ij->i", points, points)[:, None]
        - 2.0 * points @ centroids.T
        + np.einsum("ij,ij->i", centroids, centroids)[None, :]
    )
    return np.maximum(d2, 0.0)


def _plusplus(points, k, rng):
    """Greedy k-means++: sample 2 + log(k) candidates per step, keep the best."""
    n = points.shape[0]
    n_trials = 2 + int(math.log(k))
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    closest = _sq_dists(points, centers[:1]).ravel()
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            # every point coincides with a chosen centre
            centers[c] = points[rng.integers(n)]
            continue
        cand = rng.choice(n, size=n_trials, p=closest / total)
        cand_d2 = np.minimum(closest[None, :], _sq_dists(points, points[cand]).T)
        best = int(np.argmin(cand_d2.sum(axis=1)))
        centers[c] = points[cand[best]]
        closest = cand_d2[best]
    return centers


def _lloyd(points, centers, max_iter):
    k = centers.shape[0]
    labels = None
    prev_inertia = np.inf
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d2 = _sq_dists(points, centers)
        new_labels = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(len(points)), new_labels].sum())
        assert inertia <= prev_inertia * (1 + 1e-9) + 1e-12, "k-means inertia increased"
        prev_inertia = inertia
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        counts = np.bincount(labels, minlength=k)
        for c in np.flatnonzero(counts == 0):
            # re-seed with the point farthest from its own centroid
            own = _sq_dists(points, centers)[np.arange(len(points)), labels]
            own[counts[labels] <= 1] = -1.0
            far = int(np.argmax(own))
            counts[labels[far]] -= 1
            labels[far] = c
            counts[c] = 1
            centers[c] = points[far]
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, points)
        centers = sums / counts[:, None]
    d2 = _sq_dists(points, centers)
    inertia = float(d2[np.arange(len(points)), labels].sum())
    return labels, centers, inertia, n_iter


def kmeans(points, k, seed=0, max_iter=300, n_restarts=10):
    """Lloyd's algorithm from greedy k-means++ seeds, best of ``n_restarts``.

    Restart streams are spawned from ``seed`` so the result is reproducible.
    Assignment ties go to the lower cluster index.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2:
        raise ParameterError(f"points must be 2-D, got shape {x.shape}")
    if int(k) != k or k < 1:
        raise ParameterError(f"k must be a positive integer, got {k}")
    if k > x.shape[0]:
        raise ParameterError(f"k={k} exceeds the number of points N={x.shape[0]}")
    if max_iter < 1 or n_restarts < 1:
        raise ParameterError("max_iter and n_restarts must be positive")
    best = None
    for child in np.random.SeedSequence(seed).spawn(n_restarts):
        rng = np.random.default_rng(child)
        labels, centers, inertia, n_iter = _lloyd(x, _plusplus(x, k, rng), max_iter)
        if best is None or inertia < best[2]:
            best = (labels, centers, inertia, n_iter)
    labels, centers, inertia, n_iter = best
    return ClusterAssignment(labels, centers, inertia, seed, n_iter)


def cluster_means(points, labels, k):
    """Per-cluster mean rows; empty clusters get NaN."""
    sums = np.zeros((k, points.shape[1]))
    np.add.at(sums, labels, points)
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        return sums / counts[:, None]


def spectral_clustering(ps, k_clusters, k_nn=10, seed=0, metric="euclidean",
                        n_restarts=10, max_iter=300, eig_method="auto"):
    """k-NN graph -> bottom nonzero Laplacian eigenvectors -> k-means.

    The embedding keeps component contrasts (see ``spectral_embed``) and has
    ``min(k_clusters, N - 1)`` columns, the most a Laplacian can supply.
    Centroids are means of the original points per cluster; ``inertia`` is
    the embedded-space k-means cost. Stage times land in ``timings`` under
    ``graph``, ``eig`` and ``kmeans``.
    """
    if not isinstance(ps, PointSet):
        ps = PointSet(ps)
    if k_clusters > ps.n:
        raise ParameterError(f"k_clusters={k_clusters} exceeds N={ps.n}")
    g, t_graph = timed(build_knn_graph, ps, k_nn, metric)
    dim = min(k_clusters, ps.n - 1)
    emb, t_eig = timed(spectral_embed, g, dim, method=eig_method, seed=seed,
                       component_contrasts=True)
    km, t_km = timed(kmeans, emb.coords, k_clusters, seed=seed, max_iter=max_iter,
                     n_restarts=n_restarts)
    centroids = cluster_means(ps.points, km.labels, k_clusters)
    return ClusterAssignment(
        km.labels, centroids, km.inertia, seed, km.n_iter,
        {"graph": t_graph, "eig": t_eig, "kmeans": t_km},
    )
