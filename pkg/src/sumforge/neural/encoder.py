"""Single-block self-attention sentence encoder (a small BERT-like stand-in).

token + position embedding -> one-head self-attention, residual, layer norm
-> GELU feed-forward, residual, layer norm -> mean over positions.
All projection matrices are stored (out, in) and applied as ``X @ W.T``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from ..errors import OutOfVocab, SentenceTooLong, ShapeMismatch
from .ops import gelu, gelu_grad, layer_norm, layer_norm_backward, softmax


@dataclass(frozen=True)
class EncoderParams:
    tok_emb: np.ndarray   # (vocab, d_model)
    pos_emb: np.ndarray   # (max_len, d_model)
    W_q: np.ndarray
    W_k: np.ndarray
    W_v: np.ndarray
    W_out: np.ndarray
    ln1_gain: np.ndarray
    ln1_offset: np.ndarray
    W_ff1: np.ndarray     # (d_ff, d_model)
    b_ff1: np.ndarray
    W_ff2: np.ndarray     # (d_model, d_ff)
    b_ff2: np.ndarray
    ln2_gain: np.ndarray
    ln2_offset: np.ndarray

    def __post_init__(self):
        d = self.tok_emb.shape[1]
        square = (d, d)
        ok = (self.pos_emb.shape[1] == d
              and all(getattr(self, n).shape == square for n in ("W_q", "W_k", "W_v", "W_out"))
              and self.W_ff1.shape[1] == d and self.W_ff2.shape == self.W_ff1.shape[::-1]
              and self.b_ff1.shape == self.W_ff1.shape[:1] and self.b_ff2.shape == (d,)
              and all(getattr(self, n).shape == (d,) for n in
                      ("ln1_gain", "ln1_offset", "ln2_gain", "ln2_offset")))
        if not ok:
            raise ShapeMismatch("encoder parameter shapes are inconsistent")

    @property
    def d_model(self) -> int:
        return self.tok_emb.shape[1]

    @property
    def vocab_size(self) -> int:
        return self.tok_emb.shape[0]

    @property
    def max_len(self) -> int:
        return self.pos_emb.shape[0]

    @classmethod
    def from_dict(cls, params: dict, prefix: str) -> "EncoderParams":
        return cls(**{f.name: params[f"{prefix}.{f.name}"] for f in fields(cls)})


def param_names(prefix: str) -> list[str]:
    return [f"{prefix}.{f.name}" for f in fields(EncoderParams)]


def param_shapes(prefix: str, vocab: int, d_model: int, d_ff: int, max_len: int) -> dict:
    d = d_model
    shapes = {
        "tok_emb": (vocab, d), "pos_emb": (max_len, d),
        "W_q": (d, d), "W_k": (d, d), "W_v": (d, d), "W_out": (d, d),
        "ln1_gain": (d,), "ln1_offset": (d,),
        "W_ff1": (d_ff, d), "b_ff1": (d_ff,), "W_ff2": (d, d_ff), "b_ff2": (d,),
        "ln2_gain": (d,), "ln2_offset": (d,),
    }
    return {f"{prefix}.{k}": v for k, v in shapes.items()}


def _check_ids(params: EncoderParams, ids) -> np.ndarray:
    ids = np.asarray(ids, dtype=np.int64).reshape(-1)
    if len(ids) == 0:
        raise ShapeMismatch("cannot encode an empty sentence")
    if len(ids) > params.max_len:
        raise SentenceTooLong(f"sentence of {len(ids)} tokens exceeds max_len={params.max_len}")
    if ids.min() < 0 or ids.max() >= params.vocab_size:
        raise OutOfVocab(f"token id outside [0, {params.vocab_size})")
    return ids


class EncoderTape:
    """Forward pass for one sentence, retaining activations for backward."""

    def __init__(self, params: EncoderParams, token_ids):
        p = params
        self.params = p
        self.ids = ids = _check_ids(p, token_ids)
        L, d = len(ids), p.d_model
        self.X = X = p.tok_emb[ids] + p.pos_emb[:L]
        self.Q, self.K, self.V = X @ p.W_q.T, X @ p.W_k.T, X @ p.W_v.T
        self.scale = 1.0 / np.sqrt(d)
        self.A = softmax(self.Q @ self.K.T * self.scale, axis=1)
        self.Z = self.A @ self.V
        H1, self.ln1 = layer_norm(X + self.Z @ p.W_out.T, p.ln1_gain, p.ln1_offset)
        self.H1 = H1
        self.U = H1 @ p.W_ff1.T + p.b_ff1
        self.G = gelu(self.U)
        H2, self.ln2 = layer_norm(H1 + self.G @ p.W_ff2.T + p.b_ff2, p.ln2_gain, p.ln2_offset)
        self.output = H2.mean(axis=0)

    def backward(self, ds) -> dict:
        """Gradients w.r.t. every encoder field given d(loss)/d(output).

        Embedding gradients are returned sparsely as ``("rows", ids, dX)``
        under ``tok_emb`` to avoid materialising a vocab-sized array per
        sentence; :func:`accumulate` knows how to add them.
        """
        p = self.params
        L = len(self.ids)
        dH2 = np.broadcast_to(np.asarray(ds) / L, (L, p.d_model))
        g = {}
        dR2, g["ln2_gain"], g["ln2_offset"] = layer_norm_backward(dH2, p.ln2_gain, self.ln2)
        g["W_ff2"] = dR2.T @ self.G
        g["b_ff2"] = dR2.sum(axis=0)
        dU = (dR2 @ p.W_ff2) * gelu_grad(self.U)
        g["W_ff1"] = dU.T @ self.H1
        g["b_ff1"] = dU.sum(axis=0)
        dH1 = dR2 + dU @ p.W_ff1
        dR1, g["ln1_gain"], g["ln1_offset"] = layer_norm_backward(dH1, p.ln1_gain, self.ln1)
        g["W_out"] = dR1.T @ self.Z
        dZ = dR1 @ p.W_out
        dA = dZ @ self.V.T
        dV = self.A.T @ dZ
        dS = self.A * (dA - (dA * self.A).sum(axis=1, keepdims=True)) * self.scale
        dQ = dS @ self.K
        dK = dS.T @ self.Q
        X = self.X
        g["W_q"] = dQ.T @ X
        g["W_k"] = dK.T @ X
        g["W_v"] = dV.T @ X
        dX = dR1 + dQ @ p.W_q + dK @ p.W_k + dV @ p.W_v
        pos = np.zeros_like(p.pos_emb)
        pos[:L] = dX
        g["pos_emb"] = pos
        g["tok_emb"] = ("rows", self.ids, dX)
        return g


def encode_sentence(params: EncoderParams, token_ids) -> np.ndarray:
    return EncoderTape(params, token_ids).output
