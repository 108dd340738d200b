"""Node-classification model with node-wise diverse spectral filters.

A shared polynomial backbone (monomial, Bernstein, or Jacobi basis) is
modulated per node: a positional embedding, iteratively refined over the
graph, feeds tiny per-order heads whose outputs gate the shared filter
coefficients. Every node therefore runs its own spectral filter while
parameter count stays within a constant factor of the shared backbone.

Two variants are exposed: mode "I" couples position refinement to a learned
node-similarity correction; mode "R" drops that correction (its weight is
pinned to zero, and the similarity term is never even computed) and instead
regularizes positional columns toward orthogonality.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Value
from .errors import ConfigError, UsageError
from .graph import Graph, SparseOperator
from .polynomials import (
    Bernstein,
    BasisKind,
    Jacobi,
    Monomial,
    bernstein_weight,
    jacobi_first_coefficients,
    jacobi_step_coefficients,
)
from .spectral import SpectralDecomposition

BACKBONES = ("GPR", "Bern", "Jacobi")
MODES = ("I", "R")
PE_INITS = ("LapPE", "RWPE")
SIGMAS = ("Sigmoid", "Tanh")
GAMMA_INITS = ("ppr", "uniform", "random")


@dataclass(frozen=True)
class DsfConfig:
    """Model hyperparameters.

    ``sigma_p`` may be left ``None`` to pick the backbone default (Sigmoid
    for Bern, which needs nonnegative gates; Tanh otherwise). Mode "R"
    requires ``eta2 == 0``; the Bern backbone requires Sigmoid gates.
    """

    K: int = 10
    d: int = 64
    f_p: int = 16
    eta1: float = 0.1
    eta2: float = 0.0
    lambda_orth: float = 0.0
    mode: str = "R"
    backbone: str = "GPR"
    pe_init: str = "RWPE"
    dropout_p: float = 0.5
    sigma_p: str | None = None
    gamma_init: str = "ppr"
    ppr_alpha: float = 0.1
    jacobi_a: float = 1.0
    jacobi_b: float = 1.0
    lappe_skip_first: bool = False
    ablate_ipe: bool = False

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ConfigError(f"K must be a positive polynomial order, got {self.K}")
        if self.d < 1 or self.f_p < 1:
            raise ConfigError(f"widths must be positive, got d={self.d}, f_p={self.f_p}")
        if not 0.0 <= self.eta1 <= 1.0:
            raise ConfigError(f"eta1 must lie in [0, 1], got {self.eta1}")
        if self.eta2 < 0.0:
            raise ConfigError(f"eta2 must be nonnegative, got {self.eta2}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "R" and self.eta2 != 0.0:
            raise ConfigError(f"mode R pins eta2 to 0, got eta2={self.eta2}")
        if self.backbone not in BACKBONES:
            raise ConfigError(f"backbone must be one of {BACKBONES}, got {self.backbone!r}")
        if self.pe_init not in PE_INITS:
            raise ConfigError(f"pe_init must be one of {PE_INITS}, got {self.pe_init!r}")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ConfigError(f"dropout_p must lie in [0, 1), got {self.dropout_p}")
        if self.lambda_orth < 0.0:
            raise ConfigError(f"lambda_orth must be nonnegative, got {self.lambda_orth}")
        if self.sigma_p is None:
            default = "Sigmoid" if self.backbone == "Bern" else "Tanh"
            object.__setattr__(self, "sigma_p", default)
        if self.sigma_p not in SIGMAS:
            raise ConfigError(f"sigma_p must be one of {SIGMAS}, got {self.sigma_p!r}")
        if self.backbone == "Bern" and self.sigma_p != "Sigmoid":
            raise ConfigError("the Bern backbone requires Sigmoid gates (nonnegative filters)")
        if self.gamma_init not in GAMMA_INITS:
            raise ConfigError(f"gamma_init must be one of {GAMMA_INITS}, got {self.gamma_init!r}")
        if not 0.0 < self.ppr_alpha < 1.0:
            raise ConfigError(f"ppr_alpha must lie in (0, 1), got {self.ppr_alpha}")

    def basis(self) -> BasisKind:
        if self.backbone == "GPR":
            return Monomial()
        if self.backbone == "Bern":
            return Bernstein(self.K)
        return Jacobi(self.jacobi_a, self.jacobi_b)

    def with_mode(self, mode: str) -> "DsfConfig":
        """Copy with a different variant; mode R forces eta2 back to zero."""
        eta2 = 0.0 if mode == "R" else self.eta2
        return replace(self, mode=mode, eta2=eta2)


@dataclass
class DsfParams:
    """All trainable parameters as named autodiff leaves.

    Per-order structures (gate heads, shared coefficients) hold exactly
    K + 1 entries. In the no-refinement ablation the positional pipeline is
    replaced by ``beta_free``, a directly trained (N, K+1) weight table.
    """

    w_in: Value
    b_in: Value
    w_out: Value
    b_out: Value
    w_pos: Value | None = None
    b_pos: Value | None = None
    w_ipe: Value | None = None
    gate_w: list[Value] = field(default_factory=list)
    gate_b: list[Value] = field(default_factory=list)
    gamma: list[Value] = field(default_factory=list)
    beta_free: Value | None = None

    def as_dict(self) -> dict[str, Value]:
        out: dict[str, Value] = {"w_in": self.w_in, "b_in": self.b_in}
        if self.w_pos is not None:
            out["w_pos"] = self.w_pos
            out["b_pos"] = self.b_pos
            out["w_ipe"] = self.w_ipe
        for k, (w, b) in enumerate(zip(self.gate_w, self.gate_b)):
            out[f"gate_w_{k}"] = w
            out[f"gate_b_{k}"] = b
        for k, g in enumerate(self.gamma):
            out[f"gamma_{k}"] = g
        if self.beta_free is not None:
            out["beta_free"] = self.beta_free
        out["w_out"] = self.w_out
        out["b_out"] = self.b_out
        return out

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.as_dict().items()}

    def load_snapshot(self, arrays: dict[str, np.ndarray]) -> None:
        params = self.as_dict()
        if set(arrays) != set(params):
            missing = set(params) ^ set(arrays)
            raise UsageError(f"snapshot does not match parameter set: {sorted(missing)}")
        for name, p in params.items():
            if arrays[name].shape != p.data.shape:
                raise UsageError(
                    f"snapshot entry {name} has shape {arrays[name].shape}, expected {p.data.shape}"
                )
            p.data = arrays[name].copy()


def shared_coefficients(config: DsfConfig, rng: np.random.Generator | None = None) -> np.ndarray:
    """Initial values of the shared per-order coefficients gamma.

    GPR follows its published schemes: personalized-PageRank decay
    ``alpha * (1 - alpha)^k`` (tail mass absorbed into the last order),
    uniform ``1 / (K + 1)``, or seeded uniform noise in (-0.5, 0.5). Bern
    starts flat at 0.5 (rectified in the forward pass) and Jacobi at 1.
    """
    count = config.K + 1
    if config.backbone == "Bern":
        return np.full(count, 0.5)
    if config.backbone == "Jacobi":
        return np.ones(count)
    if config.gamma_init == "ppr":
        alpha = config.ppr_alpha
        gamma = alpha * (1.0 - alpha) ** np.arange(count)
        gamma[-1] = (1.0 - alpha) ** config.K
        return gamma
    if config.gamma_init == "uniform":
        return np.full(count, 1.0 / count)
    if rng is None:
        raise UsageError("gamma_init='random' needs a generator")
    return rng.uniform(-0.5, 0.5, size=count)


def init_params(
    config: DsfConfig,
    num_features: int,
    num_classes: int,
    rng: np.random.Generator,
    num_nodes: int | None = None,
) -> DsfParams:
    """Glorot-uniform weights, zero biases, backbone-specific gammas.

    ``num_nodes`` is only needed for the ablation's free weight table.
    """

    def mat(rows: int, cols: int) -> Value:
        return Value(ad.glorot_uniform(rows, cols, rng), requires_grad=True)

    def zeros(rows: int, cols: int) -> Value:
        return Value(np.zeros((rows, cols)), requires_grad=True)

    params = DsfParams(
        w_in=mat(num_features, config.d),
        b_in=zeros(1, config.d),
        w_out=mat(config.d, num_classes),
        b_out=zeros(1, num_classes),
    )
    gamma = shared_coefficients(config, rng)

    if config.ablate_ipe:
        if num_nodes is None:
            raise UsageError("the no-refinement ablation needs num_nodes for its weight table")
        params.beta_free = Value(
            np.tile(gamma, (num_nodes, 1)), requires_grad=True
        )
        return params

    params.w_pos = mat(config.f_p, config.d)
    params.b_pos = zeros(1, config.d)
    params.w_ipe = mat(config.d, config.d)
    params.gate_w = [mat(config.d, 1) for _ in range(config.K + 1)]
    params.gate_b = [zeros(1, 1) for _ in range(config.K + 1)]
    params.gamma = [Value(np.array([[g]]), requires_grad=True) for g in gamma]
    return params


def init_positional(
    graph: Graph,
    config: DsfConfig,
    decomposition: SpectralDecomposition | None = None,
) -> np.ndarray:
    """Raw (N, f_p) positional features before the latent projection.

    LapPE stacks the first ``f_p`` sign-fixed Laplacian eigenvectors
    (optionally skipping the constant one); RWPE stacks return probabilities
    diag((A D^{-1})^m) for m = 1..f_p. Isolated nodes get zero rows under
    RWPE (the random walk has nowhere to go).
    """
    n = graph.num_nodes
    if config.f_p > n:
        raise ConfigError(
            f"positional width f_p={config.f_p} exceeds the node count {n}"
        )
    if config.pe_init == "LapPE":
        if decomposition is None:
            raise UsageError("LapPE needs the Laplacian eigendecomposition")
        start = 1 if config.lappe_skip_first else 0
        if start + config.f_p > n:
            raise ConfigError(
                f"LapPE needs {start + config.f_p} eigenvectors but the graph has {n} nodes"
            )
        return decomposition.eigenvectors[:, start : start + config.f_p].copy()

    deg = graph.degrees.astype(np.float64)
    inv_deg = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    walk = graph.adjacency.copy()
    walk.data = walk.data * inv_deg[walk.indices]  # column-scale: A @ D^{-1}
    power = walk.copy()
    columns = [power.diagonal()]
    for _ in range(config.f_p - 1):
        power = (power @ walk).tocsr()
        columns.append(power.diagonal())
    return np.stack(columns, axis=1)


def project_inputs(
    features: np.ndarray,
    positional: np.ndarray,
    params: DsfParams,
    config: DsfConfig,
    train: bool = False,
    rng: np.random.Generator | None = None,
) -> tuple[Value, Value | None]:
    """Latent feature and positional embeddings (both dropped out at train).

    Returns ``(h0, p0)``: ReLU-projected features and Tanh-projected
    positions. ``p0`` is ``None`` in the ablation, which has no positional
    pipeline.
    """
    h0 = ad.relu(ad.add(ad.matmul(Value(features), params.w_in), params.b_in))
    h0 = ad.dropout(h0, config.dropout_p, train, rng)
    if params.w_pos is None:
        return h0, None
    p0 = ad.tanh(ad.add(ad.matmul(Value(positional), params.w_pos), params.b_pos))
    p0 = ad.dropout(p0, config.dropout_p, train, rng)
    return h0, p0


def ipe_step(
    p_prev: Value,
    anchor: Value,
    a_hat: SparseOperator,
    w_ipe: Value | None,
    eta1: float,
    eta2: float,
) -> Value:
    """One iterative position-refinement step.

    Blends the anchor embedding with a propagated one:
    ``tanh(eta1 * anchor + (1 - eta1) * ((1 + eta2) A_hat - eta2 * sim) p)``
    where ``sim = sigmoid(P W P^T)``. With ``eta2 = 0`` the similarity
    correction is skipped entirely - no N x N product is ever formed.
    """
    propagated = ad.sparse_dense_matmul(a_hat, p_prev)
    if eta2 != 0.0:
        if w_ipe is None:
            raise UsageError("eta2 != 0 needs the similarity mixing weight")
        sim = ad.sigmoid(ad.matmul(ad.matmul(p_prev, w_ipe), ad.transpose(p_prev)))
        propagated = ad.sub(
            ad.scalar_mul(propagated, 1.0 + eta2),
            ad.scalar_mul(ad.matmul(sim, p_prev), eta2),
        )
    return ad.tanh(
        ad.add(ad.scalar_mul(anchor, eta1), ad.scalar_mul(propagated, 1.0 - eta1))
    )


def node_theta(p_k: Value, gate_w: Value, gate_b: Value, sigma_p: str) -> Value:
    """Per-node gate for one order: sigma_p(P^(k) w + b), an (N, 1) column."""
    pre = ad.add(ad.matmul(p_k, gate_w), gate_b)
    return ad.sigmoid(pre) if sigma_p == "Sigmoid" else ad.tanh(pre)


def lgwd_beta(
    thetas: Sequence[Value | None],
    params: DsfParams,
    config: DsfConfig,
    num_nodes: int,
) -> list[Value]:
    """Node-wise filter weights from gates and shared coefficients.

    GPR: beta_k = gamma_k * theta_k. Bern: the same with gamma rectified, so
    Sigmoid gates keep every weight nonnegative. Jacobi: beta follows the
    coefficient-decomposition discipline beta_k = gamma_k * prod_{s<=k}
    rho_s with rho the gates of orders 1..k (order 0 is the bare gamma_0).
    """
    ones = Value(np.ones((num_nodes, 1)))
    betas: list[Value] = []
    if config.backbone == "Jacobi":
        cumulative: Value | None = None
        for k in range(config.K + 1):
            if k == 0:
                betas.append(ad.hadamard(params.gamma[0], ones))
                continue
            gate = thetas[k] if thetas[k] is not None else ones
            cumulative = gate if cumulative is None else ad.hadamard(cumulative, gate)
            betas.append(ad.hadamard(params.gamma[k], cumulative))
        return betas

    for k in range(config.K + 1):
        gamma = params.gamma[k]
        if config.backbone == "Bern":
            gamma = ad.relu(gamma)
        gate = thetas[k] if thetas[k] is not None else ones
        betas.append(ad.hadamard(gamma, gate))
    return betas


def _basis_terms(kind: BasisKind, order: int, a_hat: SparseOperator, h0: Value) -> list[Value]:
    """Tape-tracked images P_k(L_hat) @ h0, mirroring the ndarray recurrences."""
    if isinstance(kind, Monomial):
        terms = [h0]
        for _ in range(order):
            terms.append(ad.sparse_dense_matmul(a_hat, terms[-1]))
        return terms

    if isinstance(kind, Jacobi):
        terms = [h0]
        if order >= 1:
            cx, c0 = jacobi_first_coefficients(kind.a, kind.b)
            terms.append(
                ad.add(
                    ad.scalar_mul(ad.sparse_dense_matmul(a_hat, h0), cx),
                    ad.scalar_mul(h0, c0),
                )
            )
        for k in range(2, order + 1):
            cx, c0, c2 = jacobi_step_coefficients(k, kind.a, kind.b)
            prev, prev2 = terms[-1], terms[-2]
            mixed = ad.add(
                ad.scalar_mul(ad.sparse_dense_matmul(a_hat, prev), cx),
                ad.scalar_mul(prev, c0),
            )
            terms.append(ad.sub(mixed, ad.scalar_mul(prev2, c2)))
        return terms

    lap_powers = [h0]
    for _ in range(order):
        prev = lap_powers[-1]
        lap_powers.append(ad.sub(prev, ad.sparse_dense_matmul(a_hat, prev)))
    terms = []
    for k in range(order + 1):
        term = lap_powers[k]
        for _ in range(order - k):
            term = ad.add(term, ad.sparse_dense_matmul(a_hat, term))
        terms.append(ad.scalar_mul(term, bernstein_weight(order, k)))
    return terms


@dataclass
class ForwardResult:
    """Outputs of one forward pass.

    ``betas`` is the realized (N, K+1) per-node weight table (plain array,
    for export/analysis); ``beta_values`` are the same columns on the tape;
    ``positional`` is the final refined embedding (``None`` in the
    ablation).
    """

    logits: Value
    positional: Value | None
    betas: np.ndarray
    beta_values: list[Value]


def forward(
    a_hat: SparseOperator,
    features: np.ndarray,
    positional: np.ndarray | None,
    params: DsfParams,
    config: DsfConfig,
    train: bool = False,
    rng: np.random.Generator | None = None,
    homogeneous: bool = False,
) -> ForwardResult:
    """Full model pass: project, refine positions, gate, filter, classify.

    ``homogeneous=True`` pins every gate to 1, which collapses the model to
    its shared-coefficient backbone (the baseline for ablations). The
    ablation config (``ablate_ipe``) instead reads the weight table directly
    from the trainable ``beta_free`` parameter.
    """
    n = features.shape[0]
    h0, p0 = project_inputs(
        features, positional if positional is not None else np.zeros((n, 1)), params, config, train, rng
    )
    kind = config.basis()
    terms = _basis_terms(kind, config.K, a_hat, h0)

    if config.ablate_ipe:
        table = params.beta_free
        if config.backbone == "Bern":
            table = ad.relu(table)
        # Column k of the weight table, kept on the tape via a one-hot selector.
        selectors = np.eye(config.K + 1)
        beta_values = [
            ad.matmul(table, Value(selectors[:, k : k + 1])) for k in range(config.K + 1)
        ]
        p_final = None
    else:
        p_list = [p0]
        eta2 = 0.0 if config.mode == "R" else config.eta2
        for _ in range(config.K):
            p_list.append(ipe_step(p_list[-1], p0, a_hat, params.w_ipe, config.eta1, eta2))

        thetas = [None] * (config.K + 1)
        gate_orders = range(1, config.K + 1) if config.backbone == "Jacobi" else range(config.K + 1)
        if not homogeneous:
            for k in gate_orders:
                thetas[k] = node_theta(p_list[k], params.gate_w[k], params.gate_b[k], config.sigma_p)
        beta_values = lgwd_beta(thetas, params, config, n)
        p_final = p_list[-1]

    z = ad.row_scale(beta_values[0], terms[0])
    for k in range(1, config.K + 1):
        z = ad.add(z, ad.row_scale(beta_values[k], terms[k]))
    logits = ad.add(ad.matmul(z, params.w_out), params.b_out)

    betas = np.hstack([bv.data for bv in beta_values])
    return ForwardResult(logits=logits, positional=p_final, betas=betas, beta_values=beta_values)


def orth_penalty(positional: Value) -> Value:
    """Orthogonality pressure on positional columns.

    Columns are centered and normalized, then the Gram matrix is compared to
    the identity under the squared Frobenius norm: zero exactly when the
    normalized columns are orthonormal.
    """
    normalized = ad.column_normalize(positional)
    gram = ad.matmul(ad.transpose(normalized), normalized)
    eye = Value(np.eye(positional.shape[1]))
    return ad.frobenius_sq(ad.sub(gram, eye))


def total_loss(
    result: ForwardResult,
    targets: np.ndarray,
    mask: np.ndarray,
    config: DsfConfig,
) -> Value:
    """Masked cross-entropy, plus the orthogonality penalty in mode R."""
    loss = ad.softmax_cross_entropy(result.logits, targets, mask)
    if config.mode == "R" and config.lambda_orth > 0.0 and result.positional is not None:
        loss = ad.add(loss, ad.scalar_mul(orth_penalty(result.positional), config.lambda_orth))
    return loss


def one_hot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    out = np.zeros((labels.shape[0], num_classes))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def accuracy(logits: np.ndarray, labels: np.ndarray, mask: np.ndarray) -> float:
    """Fraction of masked nodes whose argmax logit matches the label."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise UsageError("accuracy mask selects no rows")
    predictions = np.argmax(logits, axis=1)
    return float(np.mean(predictions[mask] == labels[mask]))
