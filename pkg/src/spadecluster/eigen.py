"""Eigensolvers for graph Laplacians.

Two problems are covered:

* the bottom nonzero eigenpairs of a Laplacian (spectral embedding), and
* the top eigenpairs of ``pinv(L_out) @ L_in`` restricted to the range of
  ``L_out`` (robustness scoring).

Each has a dense path built on ``numpy.linalg.eigh`` and an iterative path
built on ARPACK's implicitly restarted Lanczos (``scipy.sparse.linalg.eigsh``).
Both honour the same ordering, normalization and sign conventions so callers
can switch freely.
"""

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc
from scipy.sparse.linalg import LinearOperator, eigsh, splu

from .errors import NumericalError, ParameterError, RankError

# above these sizes "auto" switches to the iterative path
BOTTOM_DENSE_MAX = 500
GENERALIZED_DENSE_MAX = 2000

METHODS = ("auto", "dense", "iterative")


@dataclass(frozen=True)
class EigenPairs:
    """``values[j]`` pairs with unit column ``vectors[:, j]``."""

    values: np.ndarray
    vectors: np.ndarray

    def __len__(self):
        return self.values.size


def timed(fn, *args, **kwargs):
    """Call ``fn`` and return ``(result, wall_seconds)``."""
    t0 = time.perf_counter()
    result = fn(*args, **kwargs)
    return result, time.perf_counter() - t0


def _fix_signs(vectors):
    # largest-magnitude entry of every column made positive (first on ties)
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _as_dense(a):
    return a.toarray() if sp.issparse(a) else np.asarray(a, dtype=np.float64)


def _component_labels(lap):
    pattern = sp.csr_matrix(lap) if sp.issparse(lap) else sp.csr_matrix(np.asarray(lap))
    n_comp, labels = _cc(abs(pattern), directed=False)
    return n_comp, labels


def _indicators(labels, n_comp):
    n = labels.size
    u = sp.csr_matrix((np.ones(n), (np.arange(n), labels)), shape=(n, n_comp))
    sizes = np.bincount(labels, minlength=n_comp)
    return (u @ sp.diags(1.0 / np.sqrt(sizes))).tocsr()


def _pick(method, n, dense_max):
    if method not in METHODS:
        raise ParameterError(f"method must be one of {METHODS}, got {method!r}")
    if method == "auto":
        return "dense" if n <= dense_max else "iterative"
    return method


def _start_vector(n, seed):
    return np.random.default_rng(seed).standard_normal(n)


def dense_eig_oracle(m):
    """Full spectrum of a symmetric matrix, ascending, via LAPACK ``syevd``."""
    a = _as_dense(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if np.abs(a - a.T).max(initial=0.0) > 1e-10 * scale:
        raise ParameterError("matrix is not symmetric")
    vals, vecs = np.linalg.eigh(0.5 * (a + a.T))
    return EigenPairs(vals, vecs)


def bottom_nonzero_eigenpairs(lap, m, zero_tol=1e-8, method="auto", seed=0):
    """The ``m`` smallest eigenvalues above ``zero_tol * lambda_max``, ascending.

    Raises RankError when the graph has too many connected components for
    ``m`` nonzero eigenvalues to exist.
    """
    n = lap.shape[0]
    if int(m) != m or m < 1:
        raise ParameterError(f"m must be a positive integer, got {m}")
    n_comp, labels = _component_labels(lap)
    if m + n_comp > n:
        raise RankError(
            f"requested {m} nonzero eigenpairs but the graph has {n_comp} connected "
            f"components on {n} nodes ({n - n_comp} nonzero eigenvalues)",
            n_components=n_comp,
        )
    path = _pick(method, n, BOTTOM_DENSE_MAX)
    if path == "iterative" and m + n_comp < n - 1:
        pairs = _bottom_iterative(lap, m, zero_tol, labels, n_comp, seed)
        if pairs is not None:
            return pairs
    return _bottom_dense(lap, m, zero_tol, n_comp)


def _bottom_dense(lap, m, zero_tol, n_comp):
    vals, vecs = np.linalg.eigh(_as_dense(lap))
    lam_max = vals[-1]
    keep = np.flatnonzero(vals > zero_tol * lam_max) if lam_max > 0 else np.array([], dtype=int)
    if keep.size < m:
        raise RankError(
            f"only {keep.size} eigenvalues exceed the zero cutoff, {m} requested "
            f"({n_comp} connected components)",
            n_components=n_comp,
        )
    keep = keep[:m]
    return EigenPairs(vals[keep], _fix_signs(vecs[:, keep]))


def _bottom_iterative(lap, m, zero_tol, labels, n_comp, seed):
    n = lap.shape[0]
    lap = sp.csr_matrix(lap, dtype=np.float64)
    v0 = _start_vector(n, seed)
    lam_max = eigsh(lap, k=1, which="LA", v0=v0, tol=1e-6, return_eigenvectors=False)[0]
    if lam_max <= 0:
        raise RankError("graph has no edges", n_components=n_comp)
    cutoff = zero_tol * lam_max
    # lift the known nullspace (component indicators) above the spectrum
    u = _indicators(labels, n_comp)
    lift = 2.0 * lam_max + 1.0

    def matvec(x):
        x = np.ravel(x)
        return lap @ x + lift * (u @ (u.T @ x))

    op = LinearOperator((n, n), matvec=matvec, dtype=np.float64)
    k = m
    while True:
        if k >= n - 1:
            return None
        vals, vecs = eigsh(op, k=k, which="SA", v0=v0, tol=0)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        n_small = int(np.count_nonzero(vals <= cutoff))
        if n_small == 0 or k - n_small >= m:
            break
        k = m + n_small
    keep = np.flatnonzero(vals > cutoff)[:m]
    vals, vecs = vals[keep], vecs[:, keep]
    resid = np.linalg.norm(lap @ vecs - vecs * vals, axis=0)
    if np.any(resid > 1e-6 * lam_max):
        return None
    return EigenPairs(vals, _fix_signs(vecs))


def generalized_top_eigenpairs(lap_in, lap_out, m, zero_tol=1e-8, method="auto", seed=0):
    """Top ``m`` eigenpairs of ``pinv(lap_out) @ lap_in``, descending.

    Only the complement of ``lap_out``'s nullspace is searched; eigenvectors
    are unit-normalized and orthogonal to that nullspace.
    """
    n = lap_in.shape[0]
    if lap_in.shape != lap_out.shape or lap_in.shape[0] != lap_in.shape[1]:
        raise ParameterError(f"Laplacian shapes differ: {lap_in.shape} vs {lap_out.shape}")
    if int(m) != m or m < 1:
        raise ParameterError(f"m must be a positive integer, got {m}")
    n_comp, labels = _component_labels(lap_out)
    if m > n - n_comp:
        raise RankError(
            f"requested {m} generalized eigenpairs but the output graph has {n_comp} "
            f"components on {n} nodes",
            n_components=n_comp,
        )
    path = _pick(method, n, GENERALIZED_DENSE_MAX)
    if path == "iterative" and m < n - 1:
        return _generalized_iterative(lap_in, lap_out, m, labels, n_comp, seed)
    return _generalized_dense(lap_in, lap_out, m, zero_tol, n_comp)


def _generalized_dense(lap_in, lap_out, m, zero_tol, n_comp):
    mu, q = np.linalg.eigh(_as_dense(lap_out))
    keep = mu > zero_tol * mu[-1] if mu[-1] > 0 else np.zeros(mu.size, dtype=bool)
    if np.count_nonzero(keep) < m:
        raise RankError(
            f"pseudoinverse of the output Laplacian has rank {np.count_nonzero(keep)} < {m}",
            n_components=n_comp,
        )
    # half pseudoinverse restricted to its range: B = Q_r diag(mu_r^-1/2)
    b = q[:, keep] / np.sqrt(mu[keep])
    lin = _as_dense(lap_in)
    reduced = b.T @ lin @ b
    vals, w = np.linalg.eigh(0.5 * (reduced + reduced.T))
    top = np.argsort(vals)[::-1][:m]
    vals = vals[top]
    if np.any(vals < -1e-8 * max(1.0, abs(vals).max())):
        raise NumericalError(f"negative generalized eigenvalue {vals.min():.3e}")
    vecs = b @ w[:, top]
    vecs /= np.linalg.norm(vecs, axis=0)
    return EigenPairs(np.maximum(vals, 0.0), _fix_signs(vecs))


def _generalized_iterative(lap_in, lap_out, m, labels, n_comp, seed):
    n = lap_in.shape[0]
    lin = sp.csr_matrix(lap_in, dtype=np.float64)
    lout = sp.csr_matrix(lap_out, dtype=np.float64)
    u = _indicators(labels, n_comp)

    def project(x):
        return x - u @ (u.T @ x)

    # ground the smallest node of each component: the reduced matrix is SPD
    _, grounded = np.unique(labels, return_index=True)
    free = np.setdiff1d(np.arange(n), grounded)
    lu = splu(lout[free][:, free].tocsc())

    def pinv_apply(b):
        y = np.zeros(n)
        y[free] = lu.solve(project(b)[free])
        return project(y)

    def a_mv(x):
        x = project(np.ravel(x))
        return project(lin @ x)

    def m_mv(x):
        x = np.ravel(x)
        return lout @ x + u @ (u.T @ x)

    def minv_mv(x):
        x = np.ravel(x)
        return pinv_apply(x) + u @ (u.T @ x)

    a_op = LinearOperator((n, n), matvec=a_mv, dtype=np.float64)
    m_op = LinearOperator((n, n), matvec=m_mv, dtype=np.float64)
    minv_op = LinearOperator((n, n), matvec=minv_mv, dtype=np.float64)
    vals, vecs = eigsh(a_op, k=m, M=m_op, Minv=minv_op, which="LA",
                       v0=project(_start_vector(n, seed)), tol=0)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    if np.any(vals < -1e-8 * max(1.0, abs(vals).max())):
        raise NumericalError(f"negative generalized eigenvalue {vals.min():.3e}")
    vecs = np.column_stack([project(vecs[:, j]) for j in range(vecs.shape[1])])
    vecs /= np.linalg.norm(vecs, axis=0)
    return EigenPairs(np.maximum(vals, 0.0), _fix_signs(vecs))
