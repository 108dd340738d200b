"""Walk through the homophily and frequency diagnostics on synthetic graphs.

Two stochastic block graphs with identical sizes but opposite wiring show how
the edge homophily ratio, its per-node local version, and the local graph
frequency of Laplacian eigenvectors separate the two regimes.
"""

import numpy as np

from diverspec import (
    edge_homophily,
    eigendecompose,
    frequency_histogram,
    homophily_histogram,
    normalized_operators,
    two_block_graph,
)


def describe(name: str, heterophilous: bool) -> None:
    graph = two_block_graph(block_size=30, num_features=8, seed=7, heterophilous=heterophilous)
    print(f"\n== {name} ==")
    print(f"nodes={graph.num_nodes}  edges={graph.num_edges}  classes={graph.num_classes}")
    print(f"edge homophily ratio: {edge_homophily(graph):.3f}")

    ids, values = homophily_histogram(graph, k=2)
    print(
        f"local homophily over 2 hops: defined for {len(ids)}/{graph.num_nodes} nodes, "
        f"mean {values.mean():.3f}, std {values.std(ddof=1):.3f}"
    )

    _, l_hat = normalized_operators(graph)
    decomposition = eigendecompose(l_hat)
    for band in ("low", "mid", "high"):
        hist = frequency_histogram(graph, decomposition, band, k=2)
        print(
            f"  {band:>4}-band eigenvector (#{hist.eigen_index}, "
            f"lambda={hist.lambda_global:.3f}): local frequency "
            f"mean {hist.values.mean():.3f}, std {hist.values.std(ddof=1):.3f}"
        )


def main() -> None:
    np.set_printoptions(precision=3)
    describe("homophilous blocks (friends share labels)", heterophilous=False)
    describe("heterophilous blocks (edges cross labels)", heterophilous=True)
    print(
        "\nThe homophilous graph keeps local homophily near 1 and low-band"
        " frequencies near 0; the heterophilous one flips both."
    )


if __name__ == "__main__":
    main()
