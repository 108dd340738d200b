"""Spectral graph learning with node-wise diverse polynomial filters."""

__version__ = "0.1.0"

from .graph import (
    Graph,
    SparseOperator,
    build_graph,
    edge_homophily,
    k_hop,
    local_label_homophily,
    normalized_operators,
)
from .polynomials import (
    Bernstein,
    Jacobi,
    Monomial,
    apply_basis,
    basis_eval,
    diverse_filter,
    filter_response,
    homogeneous_filter,
    rescale_coefficients,
)
from .spectral import (
    FrequencyHistogram,
    SpectralDecomposition,
    band_eigen_index,
    eigendecompose,
    fourier,
    frequency_histogram,
    global_frequency,
    inverse_fourier,
    local_graph_frequency,
)
from .model import (
    DsfConfig,
    DsfParams,
    ForwardResult,
    forward,
    init_params,
    init_positional,
    total_loss,
)
from .training import Split, TrainConfig, aggregate, make_splits, run_grid, train_once
from .analysis import Clustering, centroid_curves, cluster_weights, homophily_histogram, pca_2d
from .datasets import load_dataset, random_graph, save_dataset, two_block_graph

__all__ = [
    "Graph",
    "SparseOperator",
    "build_graph",
    "edge_homophily",
    "k_hop",
    "local_label_homophily",
    "normalized_operators",
    "Monomial",
    "Bernstein",
    "Jacobi",
    "basis_eval",
    "apply_basis",
    "homogeneous_filter",
    "diverse_filter",
    "rescale_coefficients",
    "filter_response",
    "SpectralDecomposition",
    "FrequencyHistogram",
    "eigendecompose",
    "fourier",
    "inverse_fourier",
    "global_frequency",
    "local_graph_frequency",
    "band_eigen_index",
    "frequency_histogram",
    "DsfConfig",
    "DsfParams",
    "ForwardResult",
    "forward",
    "init_params",
    "init_positional",
    "total_loss",
    "Split",
    "TrainConfig",
    "aggregate",
    "make_splits",
    "run_grid",
    "train_once",
    "Clustering",
    "cluster_weights",
    "centroid_curves",
    "homophily_histogram",
    "pca_2d",
    "load_dataset",
    "save_dataset",
    "random_graph",
    "two_block_graph",
]
