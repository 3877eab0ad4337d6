"""One-hidden-layer perceptron (tanh hidden units, sigmoid output).

Trained on mean binary cross-entropy with full-batch Adam updates for a fixed
number of epochs. Weights start from a seeded Glorot-uniform draw.
"""
from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..errors import DomainError, TrainingError
from .base import MLP, TrainedModel, check_training_data

EPOCHS = 500
BETA1, BETA2, ADAM_EPS = 0.9, 0.999, 1e-8


def forward(W1, b1, w2, b2, X):
    """Return (hidden activations, output logits)."""
    H = np.tanh(X @ W1 + b1)
    return H, H @ w2 + float(b2)


def unpack(theta, d, h):
    W1 = theta[: d * h].reshape(d, h)
    b1 = theta[d * h: d * h + h]
    w2 = theta[d * h + h: d * h + 2 * h]
    return W1, b1, w2, theta[-1]


def pack(W1, b1, w2, b2):
    return np.concatenate([W1.ravel(), b1, w2, [float(b2)]])


def mlp_loss_and_grad(theta, X, y, hidden: int):
    """Mean cross-entropy and its gradient with respect to the flat parameter vector."""
    n, d = X.shape
    W1, b1, w2, b2 = unpack(theta, d, hidden)
    H, z = forward(W1, b1, w2, b2, X)
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    dz = (expit(z) - y) / n
    dH = np.outer(dz, w2) * (1.0 - H ** 2)
    return loss, pack(X.T @ dH, dH.sum(axis=0), H.T @ dz, dz.sum())


def init_params(d, h, rng):
    lim1 = np.sqrt(6.0 / (d + h))
    lim2 = np.sqrt(6.0 / (h + 1))
    return pack(rng.uniform(-lim1, lim1, (d, h)), np.zeros(h), rng.uniform(-lim2, lim2, h), 0.0)


def train_mlp(X, y, hidden_sizes, learning_rate_init: float, seed: int = 0,
              column_names=None, epochs: int = EPOCHS):
    hidden_sizes = tuple(int(s) for s in np.atleast_1d(hidden_sizes))
    if len(hidden_sizes) != 1 or hidden_sizes[0] < 1:
        raise DomainError(f"only a single hidden layer is supported, got {hidden_sizes}")
    if not learning_rate_init > 0:
        raise DomainError("learning_rate_init must be positive")
    X, y = check_training_data(X, y)
    h = hidden_sizes[0]
    d = X.shape[1]
    rng = np.random.default_rng(seed)
    theta = init_params(d, h, rng)
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    loss = float("nan")
    for epoch in range(1, epochs + 1):
        loss, g = mlp_loss_and_grad(theta, X, y, h)
        if not np.isfinite(loss) or not np.all(np.isfinite(g)):
            raise TrainingError(f"MLP diverged at epoch {epoch} "
                                f"with learning_rate_init={learning_rate_init}")
        m = BETA1 * m + (1 - BETA1) * g
        v = BETA2 * v + (1 - BETA2) * g * g
        mhat = m / (1 - BETA1 ** epoch)
        vhat = v / (1 - BETA2 ** epoch)
        theta = theta - learning_rate_init * mhat / (np.sqrt(vhat) + ADAM_EPS)
    final_loss, _ = mlp_loss_and_grad(theta, X, y, h)
    if not np.isfinite(final_loss) or not np.all(np.isfinite(theta)):
        raise TrainingError(f"MLP diverged with learning_rate_init={learning_rate_init}")
    W1, b1, w2, b2 = unpack(theta, d, h)
    names = list(column_names) if column_names is not None else [f"x{j}" for j in range(d)]
    return TrainedModel(
        MLP,
        {"hidden_layer_sizes": hidden_sizes, "learning_rate_init": float(learning_rate_init)},
        {"W1": W1.copy(), "b1": b1.copy(), "w2": w2.copy(), "b2": np.array(float(b2))},
        names,
        {"iterations": epochs, "converged": True, "final_loss": final_loss, "seed": int(seed)},
    )
