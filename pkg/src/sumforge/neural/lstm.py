"""LSTM cell with explicit forward and reverse-mode backward passes.

The gate input is the concatenation ``[h_prev, x]`` (hidden state first),
and every weight matrix has shape ``(d_h, d_h + d_x)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeMismatch
from .ops import sigmoid, tanh_act

GATES = ("f", "i", "C", "o")


@dataclass(frozen=True)
class LstmState:
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, d_h: int) -> "LstmState":
        return cls(np.zeros(d_h), np.zeros(d_h))


@dataclass(frozen=True)
class LstmParams:
    W_f: np.ndarray
    W_i: np.ndarray
    W_C: np.ndarray
    W_o: np.ndarray
    b_f: np.ndarray
    b_i: np.ndarray
    b_C: np.ndarray
    b_o: np.ndarray

    def __post_init__(self):
        shape = self.W_f.shape
        if len(shape) != 2 or shape[1] <= shape[0]:
            raise ShapeMismatch(f"LSTM weight shape {shape} is not (d_h, d_h + d_x)")
        for g in GATES:
            if getattr(self, f"W_{g}").shape != shape or getattr(self, f"b_{g}").shape != shape[:1]:
                raise ShapeMismatch(f"LSTM gate {g} shape disagrees with W_f{shape}")

    @property
    def d_h(self) -> int:
        return self.W_f.shape[0]

    @property
    def d_x(self) -> int:
        return self.W_f.shape[1] - self.W_f.shape[0]

    @classmethod
    def from_dict(cls, params: dict, prefix: str) -> "LstmParams":
        return cls(**{f"{k}_{g}": params[f"{prefix}.{k}_{g}"] for k in "Wb" for g in GATES})

    def stacked(self):
        W = np.concatenate([self.W_f, self.W_i, self.W_C, self.W_o])
        b = np.concatenate([self.b_f, self.b_i, self.b_C, self.b_o])
        return W, b


def param_names(prefix: str) -> list[str]:
    return [f"{prefix}.{k}_{g}" for k in "Wb" for g in GATES]


def _check(params: LstmParams, x, prev: LstmState):
    if x.shape != (params.d_x,) or prev.h.shape != (params.d_h,) or prev.c.shape != (params.d_h,):
        raise ShapeMismatch(
            f"lstm_step: x{x.shape} h{prev.h.shape} c{prev.c.shape} "
            f"for d_x={params.d_x}, d_h={params.d_h}")


def lstm_step(params: LstmParams, x_t, prev: LstmState) -> LstmState:
    x_t = np.asarray(x_t, dtype=float)
    _check(params, x_t, prev)
    z = np.concatenate([prev.h, x_t])
    f = sigmoid(params.W_f @ z + params.b_f)
    i = sigmoid(params.W_i @ z + params.b_i)
    c_tilde = tanh_act(params.W_C @ z + params.b_C)
    c = f * prev.c + i * c_tilde
    o = sigmoid(params.W_o @ z + params.b_o)
    return LstmState(h=o * tanh_act(c), c=c)


def lstm_forward(params: LstmParams, xs, init: LstmState | None = None) -> list[LstmState]:
    state = init if init is not None else LstmState.zeros(params.d_h)
    out = []
    for x in xs:
        state = lstm_step(params, x, state)
        out.append(state)
    return out


class LstmTape:
    """Forward pass over a sequence that keeps what the backward pass needs."""

    def __init__(self, params: LstmParams, xs, init: LstmState | None = None):
        xs = np.asarray(xs, dtype=float).reshape(len(xs), -1)
        d_h = params.d_h
        if len(xs) and xs.shape[1] != params.d_x:
            raise ShapeMismatch(f"LSTM input width {xs.shape[1]} != d_x={params.d_x}")
        init = init if init is not None else LstmState.zeros(d_h)
        self.params = params
        self.W, b = params.stacked()
        T = len(xs)
        self.z = np.empty((T, d_h + params.d_x))
        self.gates = np.empty((T, 4, d_h))
        self.c = np.empty((T + 1, d_h))
        self.tanh_c = np.empty((T, d_h))
        self.h = np.empty((T + 1, d_h))
        self.h[0], self.c[0] = init.h, init.c
        W = self.W
        for t in range(T):
            z = self.z[t]
            z[:d_h] = self.h[t]
            z[d_h:] = xs[t]
            a = (W @ z + b).reshape(4, d_h)
            g = self.gates[t]
            g[:] = 0.5 * (1.0 + np.tanh(0.5 * a))
            g[2] = np.tanh(a[2])
            self.c[t + 1] = g[0] * self.c[t] + g[1] * g[2]
            self.tanh_c[t] = np.tanh(self.c[t + 1])
            self.h[t + 1] = g[3] * self.tanh_c[t]

    @property
    def hidden(self) -> np.ndarray:
        """Hidden states after each input, shape (T, d_h)."""
        return self.h[1:]

    def backward(self, dh, dc_last=None):
        """Back-propagate ``dh`` (T, d_h), the loss gradient w.r.t. each output
        hidden state. Returns ``(grads, dxs, dh0, dc0)`` with ``grads`` keyed
        by gate-field name (``W_f`` ... ``b_o``)."""
        p = self.params
        d_h = p.d_h
        T = len(self.z)
        dW = np.zeros_like(self.W)
        db = np.zeros(4 * d_h)
        dxs = np.zeros((T, p.d_x))
        dh_next = np.zeros(d_h)
        dc_next = np.zeros(d_h) if dc_last is None else np.array(dc_last, dtype=float)
        da = np.empty((4, d_h))
        for t in range(T - 1, -1, -1):
            f, i, g, o = self.gates[t]
            th = self.tanh_c[t]
            dht = dh[t] + dh_next
            dc = dc_next + dht * o * (1.0 - th * th)
            da[0] = dc * self.c[t] * f * (1.0 - f)
            da[1] = dc * g * i * (1.0 - i)
            da[2] = dc * i * (1.0 - g * g)
            da[3] = dht * th * o * (1.0 - o)
            daf = da.reshape(-1)
            dW += np.outer(daf, self.z[t])
            db += daf
            dz = self.W.T @ daf
            dh_next = dz[:d_h]
            dxs[t] = dz[d_h:]
            dc_next = dc * f
        grads = {}
        for k, gname in enumerate(GATES):
            grads[f"W_{gname}"] = dW[k * d_h:(k + 1) * d_h]
            grads[f"b_{gname}"] = db[k * d_h:(k + 1) * d_h]
        return grads, dxs, dh_next, dc_next
