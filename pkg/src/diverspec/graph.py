"""Undirected graphs with node features/labels and their normalized operators.

The container is deliberately small: a canonical edge array plus dense
feature/label arrays. Everything downstream (spectral analysis, polynomial
filtering, homophily diagnostics) works off this one representation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

from .errors import DataError


@dataclass(frozen=True)
class SparseOperator:
    """CSR matrix plus an explicit symmetry flag.

    Graph operators here (normalized adjacency, normalized Laplacian) are
    symmetric by construction; the flag lets consumers that require symmetry
    (the eigensolver) check it without probing the matrix.
    """

    matrix: sparse.csr_array
    symmetric: bool = True

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def dot(self, x: np.ndarray) -> np.ndarray:
        """Multiply a dense vector or matrix by the operator."""
        return self.matrix @ x

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with node features and integer class labels.

    ``edges`` is canonical: every undirected edge appears exactly once as
    ``(p, q)`` with ``p < q``, rows sorted lexicographically, no self loops.
    Use :func:`build_graph` rather than constructing directly.
    """

    num_nodes: int
    edges: np.ndarray
    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def num_features(self) -> int:
        return int(self.features.shape[1])

    @cached_property
    def degrees(self) -> np.ndarray:
        """Per-node degree over the canonical (undirected) edge set."""
        return np.bincount(self.edges.ravel(), minlength=self.num_nodes).astype(np.int64)

    @cached_property
    def adjacency(self) -> sparse.csr_array:
        """Unweighted adjacency with both edge directions materialized."""
        n = self.num_nodes
        if self.num_edges == 0:
            return sparse.csr_array((n, n), dtype=np.float64)
        rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        data = np.ones(rows.shape[0], dtype=np.float64)
        return sparse.csr_array((data, (rows, cols)), shape=(n, n))


def build_graph(
    edge_list: np.ndarray | list,
    num_nodes: int,
    features: np.ndarray,
    labels: np.ndarray,
    num_classes: int,
) -> Graph:
    """Validate and canonicalize raw inputs into a :class:`Graph`.

    The edge list may contain duplicates, both orientations, and self loops;
    duplicates and reversals collapse, self loops are dropped. Raises
    :class:`DataError` for out-of-range endpoints, shape mismatches, or
    labels outside ``[0, num_classes)``.
    """
    if num_nodes <= 0:
        raise DataError(f"graph must have at least one node, got {num_nodes}")
    if num_classes <= 0:
        raise DataError(f"graph must have at least one class, got {num_classes}")

    edges = np.asarray(edge_list, dtype=np.int64)
    if edges.size == 0:
        edges = edges.reshape(0, 2)
    if edges.ndim != 2 or edges.shape[1] != 2:
        raise DataError(f"edge list must be (E, 2), got shape {edges.shape}")
    if edges.size and (edges.min() < 0 or edges.max() >= num_nodes):
        bad = edges[(edges < 0) | (edges >= num_nodes)].flat[0]
        raise DataError(f"edge endpoint {bad} outside [0, {num_nodes})")

    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] != num_nodes:
        raise DataError(
            f"features must be ({num_nodes}, f), got shape {features.shape}"
        )
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (num_nodes,):
        raise DataError(f"labels must be ({num_nodes},), got shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        bad = labels[(labels < 0) | (labels >= num_classes)][0]
        raise DataError(f"label {bad} outside [0, {num_classes})")

    # Canonicalize: orient (min, max), drop self loops, dedupe, sort rows.
    keep = edges[:, 0] != edges[:, 1]
    edges = edges[keep]
    lo = np.minimum(edges[:, 0], edges[:, 1])
    hi = np.maximum(edges[:, 0], edges[:, 1])
    edges = np.unique(np.stack([lo, hi], axis=1), axis=0)

    features = features.copy()
    labels = labels.copy()
    for arr in (edges, features, labels):
        arr.flags.writeable = False

    return Graph(
        num_nodes=num_nodes,
        edges=edges,
        features=features,
        labels=labels,
        num_classes=num_classes,
    )


def normalized_operators(graph: Graph) -> tuple[SparseOperator, SparseOperator]:
    """Return the symmetric normalized adjacency and Laplacian.

    The adjacency is ``D^{-1/2} A D^{-1/2}`` (rows/columns of isolated nodes
    are zero); the Laplacian is ``I - A_hat``, whose diagonal is 1 for every
    node including isolated ones.
    """
    n = graph.num_nodes
    deg = graph.degrees.astype(np.float64)
    inv_sqrt = np.zeros(n)
    nonzero = deg > 0
    inv_sqrt[nonzero] = 1.0 / np.sqrt(deg[nonzero])

    if graph.num_edges:
        rows = np.concatenate([graph.edges[:, 0], graph.edges[:, 1]])
        cols = np.concatenate([graph.edges[:, 1], graph.edges[:, 0]])
        vals = inv_sqrt[rows] * inv_sqrt[cols]
    else:
        rows = np.empty(0, dtype=np.int64)
        cols = np.empty(0, dtype=np.int64)
        vals = np.empty(0, dtype=np.float64)

    a_hat = sparse.csr_array((vals, (rows, cols)), shape=(n, n))

    idx = np.arange(n)
    identity = sparse.csr_array((np.ones(n), (idx, idx)), shape=(n, n))
    l_hat = (identity - a_hat).tocsr()

    return SparseOperator(a_hat, symmetric=True), SparseOperator(l_hat, symmetric=True)


def edge_homophily(graph: Graph) -> float:
    """Fraction of edges whose endpoints share a label.

    Raises :class:`DataError` on an edgeless graph (the ratio is undefined).
    """
    if graph.num_edges == 0:
        raise DataError("edge homophily is undefined on an edgeless graph")
    same = graph.labels[graph.edges[:, 0]] == graph.labels[graph.edges[:, 1]]
    return float(np.mean(same))


def k_hop(graph: Graph, node: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """BFS neighborhood of ``node`` within ``k`` hops plus its induced edges.

    The neighborhood always contains ``node`` itself; ``k = 0`` yields
    ``({node}, no edges)``. Induced edges are rows of the canonical edge
    array with both endpoints inside the neighborhood.
    """
    if not 0 <= node < graph.num_nodes:
        raise DataError(f"node {node} outside [0, {graph.num_nodes})")
    if k < 0:
        raise DataError(f"hop count must be nonnegative, got {k}")

    member = np.zeros(graph.num_nodes, dtype=bool)
    member[node] = True
    if k > 0 and graph.num_edges:
        adj = graph.adjacency
        frontier = member.astype(np.float64)
        for _ in range(k):
            reached = adj @ frontier
            new = (reached > 0) & ~member
            if not new.any():
                break
            member |= new
            frontier = new.astype(np.float64)

    nodes = np.flatnonzero(member)
    if graph.num_edges:
        inside = member[graph.edges[:, 0]] & member[graph.edges[:, 1]]
        induced = graph.edges[inside]
    else:
        induced = graph.edges
    return nodes, induced


def local_label_homophily(graph: Graph, node: int, k: int) -> float | None:
    """Same-label fraction over the edges induced by the k-hop neighborhood.

    Returns ``None`` when the induced edge set is empty (the quantity is
    undefined there, e.g. for isolated nodes or ``k = 0``).
    """
    _, induced = k_hop(graph, node, k)
    if induced.shape[0] == 0:
        return None
    same = graph.labels[induced[:, 0]] == graph.labels[induced[:, 1]]
    return float(np.mean(same))
