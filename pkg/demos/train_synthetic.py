"""Train diverse-filter and shared-filter models on a synthetic benchmark.

A heterophilous two-block graph is a setting where one global filter shape
struggles: boundary nodes want different responses than core nodes.  The grid
below trains both variants on identical seeds and splits and prints the
aggregate test accuracy of each.
"""

import argparse

from diverspec import DsfConfig, TrainConfig, make_splits, run_grid, two_block_graph


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs", type=int, default=3)
    parser.add_argument("--splits", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--epochs", type=int, default=40)
    return parser.parse_args()


def main() -> None:
    args = parse_args()
    graph = two_block_graph(
        block_size=60, p_in=0.05, p_out=0.03, num_features=8, seed=5, heterophilous=True
    )
    model_cfg = DsfConfig(
        K=6, d=16, f_p=8, eta1=0.3, lambda_orth=0.001,
        mode="R", backbone="GPR", dropout_p=0.2,
    )
    train_cfg = TrainConfig(lr=0.05, weight_decay=5e-4, epochs=args.epochs, patience=args.epochs)
    splits = make_splits(graph, "dense", args.splits, args.seed)

    for label, homogeneous in (("diverse", False), ("shared baseline", True)):
        grid = run_grid(
            graph, model_cfg, train_cfg,
            runs=args.runs, splits=splits, base_seed=args.seed, homogeneous=homogeneous,
        )
        print(
            f"{label:<16} test acc {grid.mean_acc:.4f} +/- {grid.ci95:.4f} "
            f"({len(grid.cells)} cells, last run stopped at epoch "
            f"{grid.last_run.epochs_run})"
        )

    betas = grid.last_run.betas
    print(
        f"\nlast baseline run weight table: {betas.shape[0]} nodes x "
        f"{betas.shape[1]} orders, distinct rows: "
        f"{len({tuple(row) for row in betas.round(12).tolist()})}"
    )
    print("(rerun with the diverse variant to see per-node rows diverge)")


if __name__ == "__main__":
    main()
