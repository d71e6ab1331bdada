import numpy as np
import pytest

from spadecluster.graph import NeighborGraph, build_knn_graph


def path_graph(n=3):
    return NeighborGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def triangle():
    return NeighborGraph.from_edges(3, [(0, 1), (0, 2), (1, 2)])


def two_triangles():
    return NeighborGraph.from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)])


def random_knn_graph(n, seed, k=5, d=3):
    rng = np.random.default_rng(seed)
    return build_knn_graph(rng.standard_normal((n, d)), k)


def brute_laplacian(g):
    """Dense D - W assembled edge by edge."""
    lap = np.zeros((g.n, g.n))
    for (i, j), w in zip(g.edges, g.weights):
        lap[i, i] += w
        lap[j, j] += w
        lap[i, j] -= w
        lap[j, i] -= w
    return lap


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed in the terminal summary
CRITERIA_LINES = []


@pytest.fixture
def criterion():
    def record(number, ok, detail, level="FAIL"):
        status = "PASS" if ok else level
        line = f"criterion {number}: {status} - {detail}"
        CRITERIA_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)
