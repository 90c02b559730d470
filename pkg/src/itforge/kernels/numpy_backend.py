"""NumPy implementation of the dense network kernels.

Reference semantics for the compiled backend: same shapes, same stable
softmax, same Adam update. Arrays are float64, C-contiguous.
"""

from __future__ import annotations

import numpy as np

NAME = "python"


def forward(
    x: np.ndarray,
    w1: np.ndarray,
    b1: np.ndarray,
    w2: np.ndarray,
    b2: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Affine -> ReLU -> affine -> softmax for a batch.

    Returns (hidden activations, probabilities).
    """
    h = x @ w1.T + b1
    np.maximum(h, 0.0, out=h)
    z = h @ w2.T + b2
    z -= z.max(axis=1, keepdims=True)
    np.exp(z, out=z)
    z /= z.sum(axis=1, keepdims=True)
    return h, z


def backward(
    x: np.ndarray,
    h: np.ndarray,
    dz2: np.ndarray,
    w2: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of the two affine layers given dLoss/dlogits.

    ``h`` is the post-ReLU hidden batch from :func:`forward`; its zeros
    gate the backward pass.
    """
    g_w2 = dz2.T @ h
    g_b2 = dz2.sum(axis=0)
    dh = dz2 @ w2
    dh[h <= 0.0] = 0.0
    g_w1 = dh.T @ x
    g_b1 = dh.sum(axis=0)
    return g_w1, g_b1, g_w2, g_b2


def adam_step(
    param: np.ndarray,
    grad: np.ndarray,
    m: np.ndarray,
    v: np.ndarray,
    t: int,
    lr: float,
    beta1: float,
    beta2: float,
    eps: float,
) -> None:
    """One in-place adaptive moment update; ``t`` counts steps from 1."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    param -= lr * m_hat / (np.sqrt(v_hat) + eps)
