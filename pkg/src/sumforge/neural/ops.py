"""Elementwise activations, affine maps and softmax on numpy arrays."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch


def sigmoid(x):
    # tanh form stays finite for any input, no overflow branch needed
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=float)))


def tanh_act(x):
    return np.tanh(np.asarray(x, dtype=float))


def linear(W, b, x):
    """Affine map ``W @ x + b`` for a matrix ``W`` of shape (out, in)."""
    W, b, x = np.asarray(W), np.asarray(b), np.asarray(x)
    if W.ndim != 2 or x.shape[-1:] != W.shape[1:] or b.shape != W.shape[:1]:
        raise ShapeMismatch(f"linear: W{W.shape} b{b.shape} x{x.shape}")
    return x @ W.T + b


def softmax(z, axis=-1):
    z = np.asarray(z, dtype=float)
    e = np.exp(z - z.max(axis=axis, keepdims=True))
    return e / e.sum(axis=axis, keepdims=True)


def log_softmax(z, axis=-1):
    z = np.asarray(z, dtype=float)
    shifted = z - z.max(axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


_GELU_K = np.sqrt(2.0 / np.pi)


def gelu(u):
    return 0.5 * u * (1.0 + np.tanh(_GELU_K * (u + 0.044715 * u ** 3)))


def gelu_grad(u):
    t = np.tanh(_GELU_K * (u + 0.044715 * u ** 3))
    return 0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * _GELU_K * (1.0 + 3 * 0.044715 * u * u)


LN_EPS = 1e-5


def layer_norm(x, gain, offset):
    """Row-wise layer normalisation. Returns ``(y, cache)``."""
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    inv = 1.0 / np.sqrt((xc * xc).mean(axis=-1, keepdims=True) + LN_EPS)
    xhat = xc * inv
    return gain * xhat + offset, (xhat, inv)


def layer_norm_backward(dy, gain, cache):
    xhat, inv = cache
    dgain = (dy * xhat).sum(axis=0)
    doffset = dy.sum(axis=0)
    dxhat = dy * gain
    n = xhat.shape[-1]
    dx = inv / n * (n * dxhat - dxhat.sum(axis=-1, keepdims=True)
                    - xhat * (dxhat * xhat).sum(axis=-1, keepdims=True))
    return dx, dgain, doffset
