"""Training harness: splits, early-stopped optimization, run aggregation.

Every source of randomness is derived from integer seeds through
counter-based generators, so a (base_seed, run, split) triple pins an entire
training trajectory: initialization, dropout masks, and the split itself.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import AdamState, adam_step, backward, make_rng, zero_grad
from .errors import ConfigError, DataError, NumericalError
from .graph import Graph, normalized_operators
from .model import (
    DsfConfig,
    DsfParams,
    ForwardResult,
    accuracy,
    forward,
    init_params,
    init_positional,
    one_hot,
    total_loss,
)
from .spectral import eigendecompose

SPLIT_FRACTIONS = {"dense": (0.6, 0.2), "sparse": (0.025, 0.025)}


@dataclass(frozen=True)
class TrainConfig:
    """Optimization hyperparameters (model ones live in DsfConfig)."""

    lr: float = 0.05
    weight_decay: float = 0.0005
    epochs: int = 1000
    patience: int = 100

    def __post_init__(self) -> None:
        if self.lr <= 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be nonnegative, got {self.weight_decay}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be positive, got {self.epochs}")
        if self.patience < 1:
            raise ConfigError(f"patience must be positive, got {self.patience}")


@dataclass(frozen=True)
class Split:
    """Disjoint train/val/test node index arrays covering all nodes."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def masks(self, num_nodes: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        out = []
        for idx in (self.train, self.val, self.test):
            mask = np.zeros(num_nodes, dtype=bool)
            mask[idx] = True
            out.append(mask)
        return tuple(out)


def make_splits(graph: Graph, mode: str, num_splits: int, seed: int) -> list[Split]:
    """Random node splits: 60/20/20 (dense) or 2.5/2.5/95 percent (sparse).

    Each split is an independent permutation keyed by (seed, split index).
    Raises :class:`DataError` when a fraction rounds to an empty train or
    validation set.
    """
    if mode not in SPLIT_FRACTIONS:
        raise ConfigError(f"split mode must be one of {sorted(SPLIT_FRACTIONS)}, got {mode!r}")
    if num_splits < 1:
        raise ConfigError(f"need at least one split, got {num_splits}")
    f_train, f_val = SPLIT_FRACTIONS[mode]
    n = graph.num_nodes
    n_train = round(f_train * n)
    n_val = round(f_val * n)
    if n_train == 0 or n_val == 0 or n_train + n_val >= n:
        raise DataError(
            f"{mode} split of {n} nodes gives {n_train}/{n_val}/{n - n_train - n_val}; "
            "every part must be nonempty"
        )
    splits = []
    for split_idx in range(num_splits):
        perm = make_rng(seed, split_idx).permutation(n)
        splits.append(
            Split(
                train=np.sort(perm[:n_train]),
                val=np.sort(perm[n_train : n_train + n_val]),
                test=np.sort(perm[n_train + n_val :]),
            )
        )
    return splits


@dataclass
class RunResult:
    """One training run: accuracy at the best-validation snapshot.

    ``val_history`` holds the per-epoch validation accuracies that drove
    early stopping; ``params`` is the snapshot the test accuracy was
    computed from; ``betas`` the per-node filter weights it realizes.
    """

    test_acc: float
    best_val_acc: float
    best_epoch: int
    epochs_run: int
    val_history: list[float] = field(default_factory=list)
    params: dict[str, np.ndarray] = field(default_factory=dict)
    betas: np.ndarray | None = None


def train_once(
    graph: Graph,
    config: DsfConfig,
    train_config: TrainConfig,
    split: Split,
    seed_entropy: tuple[int, ...],
    homogeneous: bool = False,
    init_hook: Callable[[DsfParams], None] | None = None,
) -> RunResult:
    """Train one model on one split with early stopping on validation accuracy.

    The best-so-far parameters are snapshotted in memory (ties keep the
    earlier epoch) and restored before computing the test accuracy. A
    non-finite loss aborts with :class:`NumericalError`. ``init_hook``, when
    given, may edit the freshly initialized parameters in place (e.g. pin a
    group of weights) before the first epoch.
    """
    a_hat, l_hat = normalized_operators(graph)
    decomposition = eigendecompose(l_hat) if config.pe_init == "LapPE" else None
    positional = None if config.ablate_ipe else init_positional(graph, config, decomposition)

    params = init_params(
        config,
        num_features=graph.num_features,
        num_classes=graph.num_classes,
        rng=make_rng(*seed_entropy, 0),
        num_nodes=graph.num_nodes,
    )
    if init_hook is not None:
        init_hook(params)
    dropout_rng = make_rng(*seed_entropy, 1)
    optimizer = AdamState(lr=train_config.lr, weight_decay=train_config.weight_decay)
    param_dict = params.as_dict()

    targets = one_hot(graph.labels, graph.num_classes)
    train_mask, val_mask, test_mask = split.masks(graph.num_nodes)

    best_val = -np.inf
    best_epoch = 0
    best_snapshot = params.snapshot()
    val_history: list[float] = []
    epoch = 0

    for epoch in range(1, train_config.epochs + 1):
        result = forward(
            a_hat, graph.features, positional, params, config,
            train=True, rng=dropout_rng, homogeneous=homogeneous,
        )
        loss = total_loss(result, targets, train_mask, config)
        if not np.isfinite(loss.data[0, 0]):
            raise NumericalError(f"training diverged at epoch {epoch} (non-finite loss)")
        zero_grad(param_dict)
        backward(loss)
        adam_step(param_dict, optimizer)

        eval_result = forward(a_hat, graph.features, positional, params, config, homogeneous=homogeneous)
        val_acc = accuracy(eval_result.logits.data, graph.labels, val_mask)
        val_history.append(val_acc)
        if val_acc > best_val:
            best_val = val_acc
            best_epoch = epoch
            best_snapshot = params.snapshot()
        elif epoch - best_epoch >= train_config.patience:
            break

    params.load_snapshot(best_snapshot)
    final = forward(a_hat, graph.features, positional, params, config, homogeneous=homogeneous)
    return RunResult(
        test_acc=accuracy(final.logits.data, graph.labels, test_mask),
        best_val_acc=float(best_val),
        best_epoch=best_epoch,
        epochs_run=epoch,
        val_history=val_history,
        params=best_snapshot,
        betas=final.betas,
    )


def aggregate(accuracies: np.ndarray | list[float]) -> tuple[float, float]:
    """Mean and 95% confidence half-width (1.96 * sample std / sqrt(n)).

    A single run has no spread estimate; its half-width is reported as 0.
    """
    accs = np.asarray(accuracies, dtype=np.float64)
    if accs.size == 0:
        raise DataError("cannot aggregate zero runs")
    mean = float(np.mean(accs))
    if accs.size == 1:
        return mean, 0.0
    return mean, float(1.96 * np.std(accs, ddof=1) / np.sqrt(accs.size))


@dataclass
class GridResult:
    """A runs x splits experiment: per-cell records plus the aggregate."""

    mean_acc: float
    ci95: float
    cells: list[dict]
    last_run: RunResult


def run_grid(
    graph: Graph,
    config: DsfConfig,
    train_config: TrainConfig,
    runs: int,
    splits: list[Split],
    base_seed: int,
    homogeneous: bool = False,
) -> GridResult:
    """Train every (run, split) cell with seeds derived from the base seed.

    Cell (r, s) trains under the entropy tuple (base_seed, r, s), so any
    cell can be reproduced in isolation.
    """
    if runs < 1:
        raise ConfigError(f"need at least one run, got {runs}")
    cells = []
    accs = []
    last: RunResult | None = None
    for run_idx in range(runs):
        for split_idx, split in enumerate(splits):
            record = train_once(
                graph, config, train_config, split,
                seed_entropy=(base_seed, run_idx, split_idx),
                homogeneous=homogeneous,
            )
            cells.append(
                {
                    "run": run_idx,
                    "split": split_idx,
                    "seed": [base_seed, run_idx, split_idx],
                    "test_acc": record.test_acc,
                    "best_val_acc": record.best_val_acc,
                    "best_epoch": record.best_epoch,
                    "epochs_run": record.epochs_run,
                }
            )
            accs.append(record.test_acc)
            last = record
    mean, ci = aggregate(accs)
    return GridResult(mean_acc=mean, ci95=ci, cells=cells, last_run=last)
