"""The reverse-mode engine in miniature: build a loss, backprop, take a step.

Everything the model training loop does happens here on a 3x2 problem small
enough to check by hand: a linear layer, a softmax cross-entropy loss, exact
gradients versus central finite differences, and one Adam update.
"""

import numpy as np

from diverspec import autodiff as ad
from diverspec.autodiff import AdamState, Value, adam_step, glorot_uniform, make_rng


def loss_fn(w: Value, b: Value, x: np.ndarray, targets: np.ndarray) -> Value:
    logits = ad.add(ad.matmul(Value(x), w), b)
    return ad.softmax_cross_entropy(logits, targets, np.ones(len(x), dtype=bool))


def main() -> None:
    rng = make_rng(2024)
    x = rng.standard_normal((3, 4))
    targets = np.eye(2)[[0, 1, 1]]
    w = Value(glorot_uniform(4, 2, rng), requires_grad=True)
    b = Value(np.zeros((1, 2)), requires_grad=True)

    loss = loss_fn(w, b, x, targets)
    ad.backward(loss)
    print(f"loss = {loss.data[0, 0]:.6f}")
    print("dL/db =", np.round(b.grad, 6))

    # central differences on one weight entry
    h = 1e-6
    w.data[0, 0] += h
    plus = loss_fn(w, b, x, targets).data[0, 0]
    w.data[0, 0] -= 2 * h
    minus = loss_fn(w, b, x, targets).data[0, 0]
    w.data[0, 0] += h
    numeric = (plus - minus) / (2 * h)
    print(f"dL/dw[0,0]: autodiff {w.grad[0, 0]:+.8f}  numeric {numeric:+.8f}")

    params = {"w": w, "b": b}
    state = AdamState(lr=0.1)
    for step in range(1, 6):
        ad.zero_grad(params)
        loss = loss_fn(w, b, x, targets)
        ad.backward(loss)
        adam_step(params, state)
        print(f"step {step}: loss {loss.data[0, 0]:.6f}")


if __name__ == "__main__":
    main()
