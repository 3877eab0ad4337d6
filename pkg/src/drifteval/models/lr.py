"""L2-regularized logistic regression fit by damped Newton iterations.

Objective (intercept unpenalized, labels mapped to -1/+1)::

    f(w, b) = ||w||^2 / (2 C) + sum_i log(1 + exp(-y_i (w . x_i + b)))
"""
from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..errors import DomainError
from .base import LR, TrainedModel, check_training_data

GTOL = 1e-6
MAX_ITER = 10_000


def lr_objective(params, X, y, C):
    """Objective value and gradient at ``params = [w..., b]`` for 0/1 labels ``y``."""
    w, b = params[:-1], params[-1]
    ys = 2.0 * np.asarray(y, dtype=float) - 1.0
    margin = ys * (X @ w + b)
    value = 0.5 * (w @ w) / C + np.logaddexp(0.0, -margin).sum()
    coef = -ys * expit(-margin)
    grad = np.empty_like(params, dtype=float)
    grad[:-1] = X.T @ coef + w / C
    grad[-1] = coef.sum()
    return float(value), grad


def _hessian(params, X, C):
    z = X @ params[:-1] + params[-1]
    p = expit(z)
    h = p * (1 - p)
    Xa = np.hstack([X, np.ones((X.shape[0], 1))])
    H = (Xa * h[:, None]).T @ Xa
    H[np.arange(X.shape[1]), np.arange(X.shape[1])] += 1.0 / C
    return H


def train_lr(X, y, C: float, column_names=None, max_iter: int = MAX_ITER, gtol: float = GTOL):
    if not C > 0:
        raise DomainError(f"C must be positive, got {C}")
    X, y = check_training_data(X, y)
    d = X.shape[1]
    params = np.zeros(d + 1)
    pos = y.mean()
    params[-1] = np.log(pos / (1 - pos))
    value, grad = lr_objective(params, X, y, C)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(grad)) <= gtol:
            converged = True
            it -= 1
            break
        try:
            step = np.linalg.solve(_hessian(params, X, C), -grad)
        except np.linalg.LinAlgError:
            step = -grad
        slope = grad @ step
        if slope >= 0:  # not a descent direction; fall back to steepest descent
            step, slope = -grad, -(grad @ grad)
        t = 1.0
        while True:
            cand = params + t * step
            new_value, new_grad = lr_objective(cand, X, y, C)
            if new_value <= value + 1e-4 * t * slope or t < 1e-12:
                break
            t *= 0.5
        if t < 1e-12 and new_value >= value:
            # no further progress is representable
            break
        params, value, grad = cand, new_value, new_grad
    else:
        converged = bool(np.max(np.abs(grad)) <= gtol)
    names = list(column_names) if column_names is not None else [f"x{j}" for j in range(d)]
    return TrainedModel(
        LR, {"C": float(C)},
        {"coef": params[:-1].copy(), "intercept": np.array(params[-1])},
        names,
        {"iterations": it, "converged": converged, "objective": value,
         "grad_inf_norm": float(np.max(np.abs(grad)))},
    )
