"""Finite-difference checks of every scorer's training-loss gradient on a
toy document (vocab 20, width 8, three sentences of at most five tokens)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import ModelConfig, ScorerKind, document_loss, init_params
from .neural.gradcheck import GradCheckReport, grad_check

TOY_VOCAB = 20


@dataclass
class SuiteEntry:
    name: str
    report: GradCheckReport


def toy_problem(kind, seed: int = 0, bidirectional: bool = False, jitter: float = 0.3):
    """Return ``(config, params, sentences, targets)`` for one toy document.

    Parameters are the regular initialisation plus Gaussian ``jitter`` so
    biases and layer-norm gains are not at their symmetric starting values.
    """
    rng = np.random.default_rng(seed)
    cfg = ModelConfig(kind=kind, vocab_size=TOY_VOCAB, d_model=8, d_hidden=8, d_ff=16,
                      max_len=8, seed=seed, bidirectional=bidirectional)
    params = {k: v + rng.normal(0.0, jitter, v.shape) for k, v in init_params(cfg).items()}
    sentences = [rng.integers(0, TOY_VOCAB, size=int(rng.integers(2, 6))) for _ in range(3)]
    targets = np.array([1.0, 0.0, 1.0])
    return cfg, params, sentences, targets


def run_suite(seed: int = 0, tolerance: float = 1e-4, epsilon: float = 1e-5,
              coords_per_param: int | None = 24, include_bidirectional: bool = True):
    variants = [(k.value, k, False) for k in ScorerKind]
    if include_bidirectional:
        variants.append(("bertsum_lstm+bidirectional", ScorerKind.BERTSUM_LSTM, True))
    out = []
    for name, kind, bidi in variants:
        cfg, params, sents, y = toy_problem(kind, seed, bidi)
        report = grad_check(lambda p: document_loss(cfg, p, sents, y), params,
                            epsilon=epsilon, tolerance=tolerance,
                            coords_per_param=coords_per_param, seed=seed)
        out.append(SuiteEntry(name, report))
    return out
