"""Polynomial filter bases over the normalized-Laplacian spectrum [0, 2].

Three bases are supported: monomials in ``1 - lambda`` (powers of the
normalized adjacency), Bernstein polynomials of a fixed order, and Jacobi
polynomials evaluated at ``x = 1 - lambda``. Filters are applied with sparse
matrix-vector recurrences only; no eigendecomposition is ever required to
run a filter.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import UsageError
from .graph import SparseOperator


@dataclass(frozen=True)
class Monomial:
    """Basis P_k(lambda) = (1 - lambda)^k: order-k adjacency powers."""


@dataclass(frozen=True)
class Bernstein:
    """Degree-``order`` Bernstein basis rescaled to [0, 2].

    P_k(lambda) = 2^{-order} * C(order, k) * (2 - lambda)^{order-k} * lambda^k.
    """

    order: int

    def __post_init__(self) -> None:
        if self.order < 0:
            raise UsageError(f"Bernstein order must be nonnegative, got {self.order}")


@dataclass(frozen=True)
class Jacobi:
    """Jacobi polynomials P_k^{(a, b)} evaluated at x = 1 - lambda."""

    a: float = 1.0
    b: float = 1.0

    def __post_init__(self) -> None:
        if self.a <= -1 or self.b <= -1:
            raise UsageError(f"Jacobi parameters must exceed -1, got a={self.a}, b={self.b}")


BasisKind = Monomial | Bernstein | Jacobi


def jacobi_step_coefficients(k: int, a: float, b: float) -> tuple[float, float, float]:
    """Three-term recurrence weights (cx, c0, c2) for Jacobi order ``k >= 2``.

    P_k(x) = (cx * x + c0) * P_{k-1}(x) - c2 * P_{k-2}(x).
    """
    s = 2 * k + a + b
    den = 2 * k * (k + a + b) * (s - 2)
    cx = (s - 1) * s * (s - 2) / den
    c0 = (s - 1) * (a * a - b * b) / den
    c2 = 2 * (k + a - 1) * (k + b - 1) * s / den
    return cx, c0, c2


def jacobi_first_coefficients(a: float, b: float) -> tuple[float, float]:
    """Weights (cx, c0) of P_1(x) = cx * x + c0."""
    return (a + b + 2) / 2.0, (a - b) / 2.0


def bernstein_weight(order: int, k: int) -> float:
    """Scalar prefactor 2^{-order} * C(order, k) of the k-th Bernstein term."""
    return comb(order, k) / float(2**order)


def basis_eval(kind: BasisKind, k: int, lam: np.ndarray | float) -> np.ndarray | float:
    """Evaluate the k-th basis polynomial at spectrum points ``lam``."""
    if k < 0:
        raise UsageError(f"basis index must be nonnegative, got {k}")
    lam_arr = np.asarray(lam, dtype=np.float64)

    if isinstance(kind, Monomial):
        out = (1.0 - lam_arr) ** k
    elif isinstance(kind, Bernstein):
        if k > kind.order:
            raise UsageError(f"Bernstein index {k} exceeds basis order {kind.order}")
        out = bernstein_weight(kind.order, k) * (2.0 - lam_arr) ** (kind.order - k) * lam_arr**k
    else:
        x = 1.0 - lam_arr
        prev = np.ones_like(x)
        if k == 0:
            out = prev
        else:
            cx, c0 = jacobi_first_coefficients(kind.a, kind.b)
            cur = cx * x + c0
            for j in range(2, k + 1):
                cx, c0, c2 = jacobi_step_coefficients(j, kind.a, kind.b)
                cur, prev = (cx * x + c0) * cur - c2 * prev, cur
            out = cur

    if np.isscalar(lam) or np.asarray(lam).ndim == 0:
        return float(out)
    return out


def _check_order(kind: BasisKind, order: int) -> None:
    if order < 0:
        raise UsageError(f"filter order must be nonnegative, got {order}")
    if isinstance(kind, Bernstein) and kind.order != order:
        raise UsageError(
            f"Bernstein basis order {kind.order} does not match filter order {order}"
        )


def apply_basis(
    kind: BasisKind, order: int, a_hat: SparseOperator, signals: np.ndarray
) -> list[np.ndarray]:
    """All basis images P_k(L_hat) @ signals for k = 0..order.

    Runs entirely on sparse matvec recurrences against the normalized
    adjacency (L_hat = I - A_hat is never formed). Each output matches the
    shape of ``signals``.
    """
    _check_order(kind, order)
    x = np.asarray(signals, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != a_hat.shape[0]:
        raise UsageError(
            f"signals must be ({a_hat.shape[0]}, d), got shape {x.shape}"
        )

    if isinstance(kind, Monomial):
        terms = [x]
        for _ in range(order):
            terms.append(a_hat.dot(terms[-1]))
        return terms

    if isinstance(kind, Jacobi):
        terms = [x]
        if order >= 1:
            cx, c0 = jacobi_first_coefficients(kind.a, kind.b)
            terms.append(cx * a_hat.dot(x) + c0 * x)
        for k in range(2, order + 1):
            cx, c0, c2 = jacobi_step_coefficients(k, kind.a, kind.b)
            prev, prev2 = terms[-1], terms[-2]
            terms.append(cx * a_hat.dot(prev) + c0 * prev - c2 * prev2)
        return terms

    # Bernstein: P_k(L) X = w_k (I + A)^{order-k} (I - A)^k X.
    lap_powers = [x]
    for _ in range(order):
        prev = lap_powers[-1]
        lap_powers.append(prev - a_hat.dot(prev))
    terms = []
    for k in range(order + 1):
        term = lap_powers[k]
        for _ in range(order - k):
            term = term + a_hat.dot(term)
        terms.append(bernstein_weight(order, k) * term)
    return terms


def homogeneous_filter(
    coefficients: np.ndarray, kind: BasisKind, a_hat: SparseOperator, signals: np.ndarray
) -> np.ndarray:
    """Filter with one shared coefficient per order: sum_k c_k P_k(L) X."""
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if coefficients.ndim != 1:
        raise UsageError(
            "shared coefficients must be 1-D; use diverse_filter for a "
            f"per-node table (got shape {coefficients.shape})"
        )
    terms = apply_basis(kind, len(coefficients) - 1, a_hat, signals)
    out = coefficients[0] * terms[0]
    for k in range(1, len(terms)):
        out = out + coefficients[k] * terms[k]
    return out


def diverse_filter(
    weights: np.ndarray, kind: BasisKind, a_hat: SparseOperator, signals: np.ndarray
) -> np.ndarray:
    """Filter with node-specific coefficients.

    ``weights`` is (N, order + 1); row i holds node i's coefficients, so the
    output row is sum_k weights[i, k] * (P_k(L) X)[i].
    """
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 2 or weights.shape[0] != a_hat.shape[0]:
        raise UsageError(
            f"weights must be ({a_hat.shape[0]}, order + 1), got {weights.shape}"
        )
    terms = apply_basis(kind, weights.shape[1] - 1, a_hat, signals)
    out = weights[:, 0:1] * terms[0]
    for k in range(1, len(terms)):
        out = out + weights[:, k : k + 1] * terms[k]
    return out


def chebyshev_nodes(count: int, lo: float, hi: float) -> np.ndarray:
    """``count`` Chebyshev points of the first kind mapped onto [lo, hi]."""
    j = np.arange(count)
    base = np.cos((2 * j + 1) * np.pi / (2 * count))
    return (lo + hi) / 2.0 + (hi - lo) / 2.0 * base


def _solve_vandermonde(nodes: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Power coefficients a with sum_j a_j * nodes_i^j = values_i.

    Bjorck-Pereyra elimination: Newton divided differences followed by the
    Newton-to-monomial triangle. Far more accurate than a generic LU solve
    on the notoriously ill-conditioned Vandermonde matrix.
    """
    a = np.array(values, dtype=np.float64)
    n = nodes.size
    for k in range(n - 1):
        for i in range(n - 1, k, -1):
            a[i] = (a[i] - a[i - 1]) / (nodes[i] - nodes[i - k - 1])
    for k in range(n - 2, -1, -1):
        for i in range(k, n - 1):
            a[i] = a[i] - nodes[k] * a[i + 1]
    return a


def rescale_coefficients(
    coefficients: np.ndarray, ratio: float, kind: BasisKind
) -> np.ndarray:
    """Coefficients of g with g(x) = f(ratio * x) in the same basis.

    Works by interpolating f on Chebyshev nodes of [0, 2] to recover its
    power-series form (in the scaled variable x/2 for conditioning), scaling
    the k-th power coefficient by ratio^k, and re-interpolating back into the
    basis. Exact for polynomials up to rounding.
    """
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if coefficients.ndim != 1 or coefficients.size == 0:
        raise UsageError("coefficients must be a nonempty 1-D array")
    if ratio < 0:
        raise UsageError(f"rescaling ratio must be nonnegative, got {ratio}")
    order = coefficients.size - 1
    _check_order(kind, order)
    if ratio == 1.0:
        return coefficients.copy()

    nodes = chebyshev_nodes(order + 1, 0.0, 2.0)
    basis_matrix = np.stack(
        [np.atleast_1d(basis_eval(kind, k, nodes)) for k in range(order + 1)], axis=1
    )
    f_values = basis_matrix @ coefficients

    scaled_nodes = nodes / 2.0
    power = _solve_vandermonde(scaled_nodes, f_values)
    g_values = np.vander(scaled_nodes, order + 1, increasing=True) @ (
        power * ratio ** np.arange(order + 1)
    )
    out = np.linalg.solve(basis_matrix, g_values)
    residual = g_values - basis_matrix @ out
    return out + np.linalg.solve(basis_matrix, residual)


def filter_response(
    coefficients: np.ndarray, kind: BasisKind, grid: np.ndarray
) -> np.ndarray:
    """Scalar response g(lambda) = sum_k c_k P_k(lambda) on a spectrum grid."""
    coefficients = np.asarray(coefficients, dtype=np.float64)
    _check_order(kind, coefficients.size - 1)
    grid = np.asarray(grid, dtype=np.float64)
    out = np.zeros_like(grid)
    for k, c in enumerate(coefficients):
        out = out + c * np.atleast_1d(basis_eval(kind, k, grid))
    return out
