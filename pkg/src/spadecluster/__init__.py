"""Robust-node spectral clustering.

Score each point's sensitivity to noisy k-NN edges, cluster only the most
robust points, and assign the rest to the nearest centroid.
"""

from .clustering import ClusterAssignment, Embedding, kmeans, spectral_clustering, spectral_embed
from .dataset import PointSet, load_csv, load_idx, make_blobs, write_csv
from .eigen import (
    EigenPairs,
    bottom_nonzero_eigenpairs,
    dense_eig_oracle,
    generalized_top_eigenpairs,
    timed,
)
from .errors import (
    ConfigError,
    ConsistencyError,
    ContractError,
    FormatError,
    NumericalError,
    ParameterError,
    ParseError,
    RankError,
    TruncatedError,
)
from .graph import NeighborGraph, build_knn_graph, connected_components, laplacian
from .metrics import ConfusionMatrix, acc, confusion_matrix, hungarian_max_assignment
from .pipeline import (
    ExperimentConfig,
    ExperimentReport,
    RobustClusteringResult,
    centroid_assign,
    robust_spectral_clustering,
    run_experiment,
)
from .spade import SpadeReport, build_vk, robustness_report, select_robust, spade_scores

__version__ = "0.1.0"
