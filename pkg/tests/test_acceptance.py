"""Acceptance criteria 1-9, one PASS/FAIL line each (see the terminal summary).

Criterion 7 needs the USPS/MNIST files: point SPADECLUSTER_DATA at a
directory holding ``usps.csv`` and/or the MNIST ``t10k-*`` IDX files.
Criterion 8 is a hard check only when the MNIST files are present.
"""

import itertools
import json
import os
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from conftest import random_knn_graph
from spadecluster.cli import main
from spadecluster.clustering import kmeans, spectral_clustering, spectral_embed
from spadecluster.dataset import PointSet, load_idx, make_blobs
from spadecluster.eigen import (
    bottom_nonzero_eigenpairs,
    dense_eig_oracle,
    generalized_top_eigenpairs,
    timed,
)
from spadecluster.graph import NeighborGraph, build_knn_graph, connected_components, laplacian
from spadecluster.metrics import acc, hungarian_max_assignment
from spadecluster.pipeline import ExperimentConfig, robust_spectral_clustering, run_experiment
from spadecluster.spade import build_vk, robustness_report, spade_scores

FIXTURES = Path(__file__).parent / "fixtures"
DATA_DIR = os.environ.get("SPADECLUSTER_DATA")


def _data_file(*names):
    if not DATA_DIR:
        return None
    for name in names:
        p = Path(DATA_DIR) / name
        if p.is_file():
            return p
    return None


def _connected_laplacian(n, seed, d=3, k=5):
    for s in range(seed, seed + 100):
        g = random_knn_graph(n, s, k=k, d=d)
        if connected_components(g).max() == 0:
            return laplacian(g)
    raise RuntimeError("no connected graph found")


# --- 1 ---------------------------------------------------------------------

def _materialized_scores(g, vk):
    out = np.zeros(g.n)
    for i in range(g.n):
        nbrs = g.neighbors(i)
        acc_ = 0.0
        for j in nbrs:
            e = np.zeros(g.n)
            e[i], e[j] = 1.0, -1.0
            v = vk.T @ e
            acc_ += v @ v
        out[i] = acc_ / len(nbrs)
    return out


def test_criterion_1_spade_oracle(criterion):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for t in range(50):
        n = int(rng.integers(15, 101))
        ps = PointSet(rng.standard_normal((n, int(rng.integers(2, 6)))))
        rep = robustness_report(ps, k_nn=5, k_clusters=3, seed=t)
        got = spade_scores(build_knn_graph(ps, 5), rep.vk)
        worst = max(worst, np.abs(got - _materialized_scores(build_knn_graph(ps, 5), rep.vk)).max())
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 30
    criterion(1, ok, f"50 datasets, max |diff| {worst:.2e} (tol 1e-10), {elapsed:.1f}s (< 30s)")
    assert ok


# --- 2 ---------------------------------------------------------------------

def _two_piece_graph(n, seed):
    a = random_knn_graph(n // 2, seed, k=4)
    b = random_knn_graph(n - n // 2, seed + 1, k=4)
    off = a.n
    edges = np.vstack([a.edges, b.edges + off])
    return NeighborGraph.from_edges(n, [tuple(e) for e in edges])


def _pinv_product_top(lap_in, lap_out, m):
    prod = np.linalg.pinv(lap_out.toarray(), hermitian=True) @ lap_in.toarray()
    vals = np.sort(np.linalg.eigvals(prod).real)[::-1]
    return vals[:m]


def test_criterion_2_eigen_oracles(criterion):
    graphs = [random_knn_graph(n, s) for n, s in [(20, 0), (50, 1), (100, 2), (200, 3)]]
    graphs += [_two_piece_graph(60, 4), _two_piece_graph(150, 5)]
    worst_bottom = 0.0
    for g in graphs:
        lap = laplacian(g)
        ref = bottom_nonzero_eigenpairs(lap, 6, method="dense").values
        n_comp = int(connected_components(g).max()) + 1
        oracle = dense_eig_oracle(lap.toarray()).values[n_comp:n_comp + 6]
        it = bottom_nonzero_eigenpairs(lap, 6, method="iterative", seed=1).values
        worst_bottom = max(worst_bottom, np.abs(it - oracle).max(), np.abs(ref - oracle).max())
    worst_gen = 0.0
    for t in range(20):
        n = 30 + 70 * t // 19
        lin, lout = _connected_laplacian(n, 100 + t), _connected_laplacian(n, 500 + t, d=2)
        ref = _pinv_product_top(lin, lout, 5)
        for method in ("dense", "iterative"):
            got = generalized_top_eigenpairs(lin, lout, 5, method=method, seed=t).values
            worst_gen = max(worst_gen, (np.abs(got - ref) / np.abs(ref)).max())
    ok = worst_bottom <= 1e-8 and worst_gen <= 1e-6
    criterion(2, ok, f"bottom max |diff| {worst_bottom:.2e} (tol 1e-8), generalized max rel "
                     f"{worst_gen:.2e} (tol 1e-6) on 20 pairs n=30..100")
    assert ok


# --- 3 ---------------------------------------------------------------------

def test_criterion_3_identity_cases(criterion):
    worst = 0.0
    for t, n in enumerate((30, 60, 120)):
        lap = _connected_laplacian(n, 40 + t)
        for method in ("dense", "iterative"):
            vals = generalized_top_eigenpairs(lap, lap, 5, method=method).values
            worst = max(worst, np.abs(vals - 1.0).max())
            for c in (0.5, 2.0, 10.0):
                vals = generalized_top_eigenpairs(c * lap, lap, 5, method=method).values
                worst = max(worst, np.abs(vals - c).max())
    ok = worst <= 1e-8
    criterion(3, ok, f"L_in = c L_out for c in 1, 0.5, 2, 10: max |lambda - c| {worst:.2e} "
                     "(tol 1e-8)")
    assert ok


# --- 4 ---------------------------------------------------------------------

def test_criterion_4_acc(criterion):
    rng = np.random.default_rng(4)
    mismatches = 0
    for _ in range(200):
        k = int(rng.integers(1, 8))
        cost = rng.integers(0, 30, (k, k)).astype(float)
        perm = hungarian_max_assignment(cost)
        best = max(cost[np.arange(k), list(p)].sum() for p in itertools.permutations(range(k)))
        mismatches += cost[np.arange(k), perm].sum() != best
    broken = 0
    for _ in range(100):
        n = int(rng.integers(5, 60))
        truth, pred = rng.integers(0, 5, n), rng.integers(0, 5, n)
        a = acc(pred, truth)
        p1, p2 = rng.permutation(5), rng.permutation(5)
        broken += not (acc(p1[pred], p2[truth]) == a and acc(truth, pred) == a)
    ok = mismatches == 0 and broken == 0
    criterion(4, ok, f"200 matrices k<=7: {mismatches} mismatches vs exhaustive; "
                     f"{broken}/100 invariance violations")
    assert ok


# --- 5 ---------------------------------------------------------------------

def test_criterion_5_degenerate_pipeline(criterion):
    accs = []
    for s in range(10):
        ps = make_blobs(40, 3, 2, 0.05 + 0.02 * s, s % 3, s)
        plain = spectral_clustering(ps, 3, k_nn=10, seed=s)
        robust = robust_spectral_clustering(ps, 3, k_nn=10, m_nodes=ps.n, seed=s)
        accs.append(acc(robust.full_labels, plain.labels))
    ok = min(accs) == 1.0
    criterion(5, ok, f"m_nodes = N on 10 blob sets: min ACC vs plain labels {min(accs):.4f}")
    assert ok


# --- 6 ---------------------------------------------------------------------

def test_criterion_6_noisy_blobs(criterion):
    start = time.perf_counter()
    plain, robust = [], []
    for s in range(1, 6):
        ps = make_blobs(200, 3, 2, 0.08, 6, s)
        plain.append(acc(spectral_clustering(ps, 3, k_nn=10, seed=s).labels, ps.labels))
        res = robust_spectral_clustering(ps, 3, k_nn=10, m_nodes=ps.n // 3, seed=s)
        robust.append(acc(res.full_labels, ps.labels))
    elapsed = time.perf_counter() - start
    mp, mr = float(np.mean(plain)), float(np.mean(robust))
    recorded = json.loads((FIXTURES / "blobs_regression.json").read_text())
    stable = (np.allclose(plain, [recorded["per_seed"][str(s)]["plain"] for s in range(1, 6)])
              and np.allclose(robust, [recorded["per_seed"][str(s)]["robust"] for s in range(1, 6)]))
    ok = mr > mp and mr >= mp - 0.02 and elapsed < 120
    criterion(6, ok, f"mean ACC plain {mp:.4f}, robust {mr:.4f} (need robust > plain, floor "
                     f"plain - 0.02 = {mp - 0.02:.4f}); {elapsed:.1f}s; matches recorded "
                     f"fixture: {stable}")
    assert ok


# --- 7 ---------------------------------------------------------------------

REPLICATION = {
    # preset: (m_nodes, files, {field: (target, tolerance)})
    "usps": (2000, ("usps.csv",), {"acc_baseline": (0.6431, 0.03), "acc_robust": (0.7887, 0.05)}),
    "mnist": (1500, ("t10k-images-idx3-ubyte", "t10k-images-idx3-ubyte.gz"),
              {"acc_robust": (0.7040, 0.05)}),
}


@pytest.mark.slow
@pytest.mark.parametrize("preset", sorted(REPLICATION))
def test_criterion_7_replication(preset, criterion, tmp_path, capsys):
    m_nodes, files, targets = REPLICATION[preset]
    if _data_file(*files) is None:
        criterion(f"7 ({preset})", False, "skipped: dataset files not found "
                  "(set SPADECLUSTER_DATA)", level="SKIP")
        pytest.skip(f"{preset} data not available")
    from spadecluster.pipeline import ExperimentReport
    code = main(["replicate", preset, "--data", DATA_DIR, "--m-nodes", str(m_nodes),
                 "--output", str(tmp_path), "--style", "machine"])
    assert code == 0
    rep = ExperimentReport.from_text((tmp_path / "report.txt").read_text())
    parts, ok = [], True
    for field, (target, tol) in targets.items():
        got = getattr(rep, field)
        ok &= got is not None and abs(got - target) <= tol
        parts.append(f"{field} {100 * got:.2f} (target {100 * target:.2f} +/- {100 * tol:.0f})")
    criterion(f"7 ({preset})", ok, "; ".join(parts))
    assert ok


# --- 8 ---------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_8_eig_speedup(criterion):
    images = _data_file("t10k-images-idx3-ubyte", "t10k-images-idx3-ubyte.gz")
    if images is not None:
        ps = load_idx(images)
        full = spectral_clustering(ps, 10, k_nn=10, seed=0).timings["eig"]
        robust = robust_spectral_clustering(ps, 10, k_nn=10, m_nodes=1500, seed=0)
        ratio = full / robust.timings["subset_eig"]
        ok = ratio >= 20
        criterion(8, ok, f"MNIST N={ps.n}: full eig {full:.3f}s vs subset "
                         f"{robust.timings['subset_eig']:.3f}s = {ratio:.1f}x (need >= 20x)")
        assert ok
        return
    # desk-scale proxy: dense solves at n=2000 and n=500
    secs = {}
    for n in (500, 2000):
        ps = make_blobs(n // 10, 10, 10, 0.3, 0, 0)
        dense = laplacian(build_knn_graph(ps, 10)).toarray()
        secs[n] = min(timed(dense_eig_oracle, dense)[1] for _ in range(2))
    ratio = secs[2000] / secs[500]
    # synthetic N=10000 stand-in for the MNIST comparison, same pipeline stages
    big = make_blobs(1000, 10, 10, 0.3, 20, 0)
    g = build_knn_graph(big, 10)
    _, t_full = timed(spectral_embed, g, 10, component_contrasts=True)
    sub = big.subset(np.arange(0, big.n, big.n // 1500)[:1500])
    _, t_sub = timed(spectral_embed, build_knn_graph(sub, 10), 10, component_contrasts=True)
    ok = ratio >= 8
    detail = (f"MNIST absent; proxy dense n=2000 {secs[2000]:.3f}s vs n=500 {secs[500]:.3f}s = "
              f"{ratio:.1f}x (warn below 8x); synthetic N=10000 embed {t_full:.3f}s vs "
              f"m=1500 {t_sub:.3f}s = {t_full / t_sub:.1f}x")
    criterion(8, ok, detail, level="WARN")
    if not ok:
        warnings.warn(f"eigendecomposition proxy ratio {ratio:.1f}x below 8x", RuntimeWarning)


# --- 9 ---------------------------------------------------------------------

def test_criterion_9_determinism(criterion, tmp_path):
    ps = make_blobs(60, 3, 2, 0.1, 3, 9)
    checks = {}

    def twice(name, fn, key):
        a, b = fn(), fn()
        checks[name] = all(np.array_equal(x, y) for x, y in zip(key(a), key(b)))

    twice("kmeans", lambda: kmeans(ps.points, 3, seed=9), lambda r: [r.labels, r.centroids])
    twice("spectral_clustering", lambda: spectral_clustering(ps, 3, seed=9), lambda r: [r.labels])
    twice("robustness_report", lambda: robustness_report(ps, 10, 3, seed=9),
          lambda r: [r.scores, r.ranking, r.eigenvalues])
    twice("robust_spectral_clustering",
          lambda: robust_spectral_clustering(ps, 3, m_nodes=60, seed=9),
          lambda r: [r.full_labels, r.robust_ids, r.report.scores, r.report.ranking])
    cfg = ExperimentConfig.from_file(FIXTURES / "blobs.cfg")
    a, b = run_experiment(cfg), run_experiment(cfg)
    checks["run_experiment"] = a.timing_free() == b.timing_free()
    outs = []
    for run in ("a", "b"):
        assert main(["run", "--config", str(FIXTURES / "blobs.cfg"), "--output",
                     str(tmp_path / run)]) == 0
        outs.append([(tmp_path / run / f).read_bytes() for f in ("labels.csv", "scores.csv")])
    checks["cli run"] = outs[0] == outs[1]
    failed = [k for k, v in checks.items() if not v]
    ok = not failed
    criterion(9, ok, f"{len(checks)} entry points run twice; differing: {failed or 'none'}")
    assert ok
