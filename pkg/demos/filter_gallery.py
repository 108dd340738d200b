"""Print frequency-response curves for the three polynomial bases.

Shows a personalized-PageRank-style low pass in the monomial basis, band
filters from single Bernstein terms, a Jacobi profile, and the coefficient
rescaling identity that maps a filter on [0, 2*xi] to one on [0, 2].
"""

import numpy as np

from diverspec import Bernstein, Jacobi, Monomial, filter_response, rescale_coefficients

GRID = np.linspace(0.0, 2.0, 9)


def sparkline(values: np.ndarray) -> str:
    # crude terminal plot: map [min, max] onto eight block heights
    blocks = " .:-=+*#"
    lo, hi = values.min(), values.max()
    if hi - lo < 1e-12:  # constant response: draw a flat mid line
        return "-" * len(values)
    return "".join(blocks[int(7 * (v - lo) / (hi - lo))] for v in values)


def show(label: str, coefficients: np.ndarray, kind) -> None:
    g = filter_response(coefficients, kind, GRID)
    print(f"{label:<34} [{sparkline(g)}]  g(0)={g[0]:+.3f}  g(2)={g[-1]:+.3f}")


def main() -> None:
    alpha = 0.2
    ppr = alpha * (1 - alpha) ** np.arange(11)
    show("monomial, PPR weights (alpha=0.2)", ppr, Monomial())

    bern = Bernstein(10)
    for k in (0, 5, 10):
        e_k = np.eye(11)[k]
        show(f"bernstein order 10, single k={k}", e_k, bern)
    show("bernstein, all-ones (sums to 1)", np.ones(11), bern)

    jacobi = Jacobi(1.0, 1.0)
    show("jacobi(1,1), decaying coefficients", 0.5 ** np.arange(11), jacobi)

    print("\nrescaling identity: evaluating f on xi*x equals the rescaled g on x")
    rng = np.random.default_rng(0)
    coefficients = rng.normal(size=11)
    for xi in (0.25, 0.5, 0.9):
        rescaled = rescale_coefficients(coefficients, xi, jacobi)
        err = np.abs(
            filter_response(coefficients, jacobi, xi * GRID)
            - filter_response(rescaled, jacobi, GRID)
        ).max()
        print(f"  xi={xi:.2f}: max |f(xi x) - g(x)| = {err:.2e}")


if __name__ == "__main__":
    main()
