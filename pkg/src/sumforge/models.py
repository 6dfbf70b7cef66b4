"""Extractive sentence scorers and their training loop.

Three architectures share one two-class {select, skip} head:

``lstm_only``
    token LSTM per sentence, last hidden state -> head
``bertsum``
    encoder sentence vector -> tanh projection -> head
``bertsum_lstm``
    encoder sentence vectors -> sentence-level LSTM -> head

``p_i`` is the softmax probability of the *select* class, computed per
sentence so several sentences can be selected at once.
"""

from __future__ import annotations

import hashlib
import logging
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .corpus import Document, TokenUnit
from .errors import (CheckpointMismatch, DivergedLoss, EmptyTrainingSet, OutOfVocab,
                     ShapeMismatch)
from .neural import encoder as enc
from .neural import lstm
from .neural.checkpoint import load_checkpoint, save_checkpoint
from .neural.ops import log_softmax, softmax
from .oracle import OracleLabels

log = logging.getLogger(__name__)

SELECT, SKIP = 0, 1


class ScorerKind(str, Enum):
    LSTM_ONLY = "lstm_only"
    BERTSUM = "bertsum"
    BERTSUM_LSTM = "bertsum_lstm"

    @classmethod
    def parse(cls, value) -> "ScorerKind":
        if isinstance(value, ScorerKind):
            return value
        aliases = {"lstm": cls.LSTM_ONLY, "bertsum-lstm": cls.BERTSUM_LSTM}
        return aliases.get(value) or cls(value)

    @property
    def display(self) -> str:
        return {"lstm_only": "LSTM", "bertsum": "BERTSum",
                "bertsum_lstm": "BERTSum-LSTM"}[self.value]


@dataclass(frozen=True)
class ModelConfig:
    kind: ScorerKind = ScorerKind.BERTSUM_LSTM
    vocab_size: int = 0
    d_model: int = 32
    d_hidden: int = 32
    d_ff: int = 64
    max_len: int = 64
    seed: int = 0
    bidirectional: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", ScorerKind.parse(self.kind))
        for name in ("d_model", "d_hidden", "d_ff", "max_len"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    def to_json(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 10
    batch_size: int = 8
    seed: int = 0
    optimizer: str = "adam"
    betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    clip_norm: float = 5.0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")

    def to_json(self) -> dict:
        d = asdict(self)
        d["betas"] = list(self.betas)
        return d


class Vocabulary:
    UNK = "<unk>"

    def __init__(self, tokens: Sequence[str]):
        if not tokens or tokens[0] != self.UNK:
            tokens = [self.UNK] + [t for t in tokens if t != self.UNK]
        self.tokens = list(tokens)
        self.index = {t: i for i, t in enumerate(self.tokens)}

    @classmethod
    def build(cls, documents: Sequence[Document], min_count: int = 1) -> "Vocabulary":
        counts = Counter(tok for doc in documents for sent in doc.sentences for tok in sent)
        ranked = sorted((t for t, c in counts.items() if c >= min_count),
                        key=lambda t: (-counts[t], t))
        return cls([cls.UNK] + ranked)

    def __len__(self) -> int:
        return len(self.tokens)

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        return np.array([self.index.get(t, 0) for t in tokens], dtype=np.int64)

    def digest(self) -> str:
        return hashlib.sha256("\n".join(self.tokens).encode("utf-8")).hexdigest()[:16]


# -- parameters ---------------------------------------------------------------

def param_shapes(config: ModelConfig) -> dict[str, tuple]:
    c = config
    if c.vocab_size < 1:
        raise ValueError("vocab_size must be set before building parameters")

    def lstm_shapes(prefix, d_x):
        out = {}
        for k, g in ((k, g) for k in "Wb" for g in lstm.GATES):
            out[f"{prefix}.{k}_{g}"] = (c.d_hidden, c.d_hidden + d_x) if k == "W" else (c.d_hidden,)
        return out

    shapes: dict[str, tuple] = {}
    head_in = c.d_hidden
    if c.kind is ScorerKind.LSTM_ONLY:
        shapes["emb.tok"] = (c.vocab_size, c.d_model)
        shapes.update(lstm_shapes("tok_lstm", c.d_model))
    else:
        shapes.update(enc.param_shapes("enc", c.vocab_size, c.d_model, c.d_ff, c.max_len))
        if c.kind is ScorerKind.BERTSUM:
            shapes["proj.W_h"] = (c.d_hidden, c.d_model)
            shapes["proj.b_h"] = (c.d_hidden,)
        else:
            shapes.update(lstm_shapes("sent_lstm", c.d_model))
            if c.bidirectional:
                shapes.update(lstm_shapes("sent_lstm_rev", c.d_model))
                head_in = 2 * c.d_hidden
    shapes["head.W_p"] = (2, head_in)
    shapes["head.b_p"] = (2,)
    return shapes


def init_params(config: ModelConfig) -> dict[str, np.ndarray]:
    """Glorot-uniform matrices, zero biases, forget-gate bias 1, unit LN gains."""
    rng = np.random.default_rng(config.seed)
    params = {}
    for name, shape in param_shapes(config).items():
        leaf = name.rsplit(".", 1)[1]
        if len(shape) == 2:
            bound = np.sqrt(6.0 / (shape[0] + shape[1]))
            params[name] = rng.uniform(-bound, bound, size=shape)
        elif leaf.endswith("_gain"):
            params[name] = np.ones(shape)
        elif leaf == "b_f":
            params[name] = np.ones(shape)
        else:
            params[name] = np.zeros(shape)
    return params


# -- forward / backward ---------------------------------------------------------

class DocumentTape:
    """Forward pass over one document's sentences (lists of token ids).

    ``logits`` has shape (n_sentences, 2). :meth:`backward` maps a logits
    gradient to a dict of parameter gradients keyed like the parameters.
    """

    def __init__(self, config: ModelConfig, params: dict, sentences: Sequence[np.ndarray]):
        if not sentences:
            raise ShapeMismatch("document has no sentences")
        self.config, self.params, self.sentences = config, params, sentences
        kind = config.kind
        if kind is ScorerKind.LSTM_ONLY:
            cell = lstm.LstmParams.from_dict(params, "tok_lstm")
            emb = params["emb.tok"]
            for ids in sentences:
                if len(ids) == 0:
                    raise ShapeMismatch("cannot score an empty sentence")
                if ids.min() < 0 or ids.max() >= len(emb):
                    raise OutOfVocab(f"token id outside [0, {len(emb)})")
            self.tapes = [lstm.LstmTape(cell, emb[ids]) for ids in sentences]
            self.features = np.stack([t.hidden[-1] for t in self.tapes])
        else:
            eparams = enc.EncoderParams.from_dict(params, "enc")
            self.enc_tapes = [enc.EncoderTape(eparams, ids) for ids in sentences]
            S = np.stack([t.output for t in self.enc_tapes])
            self.S = S
            if kind is ScorerKind.BERTSUM:
                self.features = np.tanh(S @ params["proj.W_h"].T + params["proj.b_h"])
            else:
                self.fwd = lstm.LstmTape(lstm.LstmParams.from_dict(params, "sent_lstm"), S)
                feats = [self.fwd.hidden]
                if config.bidirectional:
                    self.rev = lstm.LstmTape(
                        lstm.LstmParams.from_dict(params, "sent_lstm_rev"), S[::-1])
                    feats.append(self.rev.hidden[::-1])
                self.features = np.concatenate(feats, axis=1)
        self.logits = self.features @ params["head.W_p"].T + params["head.b_p"]

    @property
    def probs(self) -> np.ndarray:
        return softmax(self.logits, axis=1)[:, SELECT]

    def loss(self, targets) -> tuple[float, np.ndarray]:
        """Summed cross-entropy against 0/1 ``targets`` and its logits gradient."""
        targets = np.asarray(targets)
        cls = np.where(targets > 0, SELECT, SKIP)
        logp = log_softmax(self.logits, axis=1)
        rows = np.arange(len(cls))
        dlogits = np.exp(logp)
        dlogits[rows, cls] -= 1.0
        return float(-logp[rows, cls].sum()), dlogits

    def backward(self, dlogits, grads: dict | None = None) -> dict:
        p, c = self.params, self.config
        if grads is None:
            grads = {name: np.zeros_like(v) for name, v in p.items()}
        grads["head.W_p"] += dlogits.T @ self.features
        grads["head.b_p"] += dlogits.sum(axis=0)
        dfeat = dlogits @ p["head.W_p"]
        if c.kind is ScorerKind.LSTM_ONLY:
            demb = grads["emb.tok"]
            for ids, tape, dv in zip(self.sentences, self.tapes, dfeat):
                dh = np.zeros_like(tape.hidden)
                dh[-1] = dv
                g, dxs, _, _ = tape.backward(dh)
                _add_prefixed(grads, "tok_lstm", g)
                np.add.at(demb, ids, dxs)
            return grads
        if c.kind is ScorerKind.BERTSUM:
            da = dfeat * (1.0 - self.features ** 2)
            grads["proj.W_h"] += da.T @ self.S
            grads["proj.b_h"] += da.sum(axis=0)
            dS = da @ p["proj.W_h"]
        else:
            d_h = c.d_hidden
            g, dS, _, _ = self.fwd.backward(dfeat[:, :d_h])
            _add_prefixed(grads, "sent_lstm", g)
            if c.bidirectional:
                g, dS_rev, _, _ = self.rev.backward(dfeat[::-1, d_h:])
                _add_prefixed(grads, "sent_lstm_rev", g)
                dS = dS + dS_rev[::-1]
        for tape, ds in zip(self.enc_tapes, dS):
            for leaf, g in tape.backward(ds).items():
                if isinstance(g, tuple):
                    _, ids, rows = g
                    np.add.at(grads[f"enc.{leaf}"], ids, rows)
                else:
                    grads[f"enc.{leaf}"] += g
        return grads


def _add_prefixed(grads, prefix, g):
    for leaf, value in g.items():
        grads[f"{prefix}.{leaf}"] += value


def targets_for(n_sentences: int, labels: OracleLabels | Sequence[int]) -> np.ndarray:
    selected = labels.selected if isinstance(labels, OracleLabels) else labels
    y = np.zeros(n_sentences)
    y[[i for i in selected if i < n_sentences]] = 1.0
    return y


def document_loss(config: ModelConfig, params: dict, sentences, targets):
    """Mean per-sentence cross-entropy of one document and its gradients."""
    tape = DocumentTape(config, params, sentences)
    total, dlogits = tape.loss(targets)
    n = len(sentences)
    grads = tape.backward(dlogits / n)
    return total / n, grads


# -- model objects --------------------------------------------------------------

@dataclass(frozen=True)
class SentenceScores:
    probs: np.ndarray
    logits: np.ndarray | None = None

    def __len__(self):
        return len(self.probs)


@dataclass
class Model:
    config: ModelConfig
    params: dict
    vocab: Vocabulary
    unit: TokenUnit = TokenUnit.CHARACTER
    meta: dict = field(default_factory=dict)

    @property
    def kind(self) -> ScorerKind:
        return self.config.kind

    def encode(self, document: Document) -> list[np.ndarray]:
        out = []
        for n, sent in enumerate(document.sentences):
            if len(sent) > self.config.max_len:
                log.warning("document %s sentence %d: %d tokens truncated to %d",
                            document.id, n, len(sent), self.config.max_len)
                sent = sent[:self.config.max_len]
            out.append(self.vocab.encode(sent))
        return out

    def header(self) -> dict:
        return {"format": "sumforge-model", "model": self.config.to_json(),
                "vocab": self.vocab.tokens, "vocab_hash": self.vocab.digest(),
                "unit": self.unit.value, "seed": self.config.seed, **self.meta}


def score_sentences(model: Model, document: Document) -> SentenceScores:
    tape = DocumentTape(model.config, model.params, model.encode(document))
    return SentenceScores(probs=tape.probs, logits=tape.logits)


def select_summary(scores: SentenceScores | Sequence[float], k: int = 3) -> list[int]:
    if k < 1:
        raise ValueError("k must be >= 1")
    probs = scores.probs if isinstance(scores, SentenceScores) else scores
    probs = [float(p) for p in probs]
    ranked = sorted(range(len(probs)), key=lambda i: (-probs[i], i))
    return sorted(ranked[:k])


def label_accuracy(model: Model, documents: Sequence[Document], labels: Sequence) -> float:
    right = total = 0
    for doc, lab in zip(documents, labels):
        y = targets_for(len(doc.sentences), lab)
        pred = score_sentences(model, doc).probs > 0.5
        right += int((pred == (y > 0)).sum())
        total += len(y)
    return right / total if total else 0.0


# -- training -------------------------------------------------------------------

class _Adam:
    def __init__(self, params, tcfg: TrainConfig):
        self.lr, (self.b1, self.b2), self.eps = tcfg.learning_rate, tcfg.betas, tcfg.adam_eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for k, g in grads.items():
            m, v = self.m[k], self.v[k]
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            params[k] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class _SGD:
    def __init__(self, params, tcfg: TrainConfig):
        self.lr = tcfg.learning_rate

    def step(self, params, grads):
        for k, g in grads.items():
            params[k] -= self.lr * g


def clip_gradients(grads: dict, max_norm: float) -> float:
    """Scale ``grads`` in place to global L2 norm ``max_norm``; returns the
    pre-clipping norm."""
    norm = float(np.sqrt(sum(float((g * g).sum()) for g in grads.values())))
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


@dataclass
class TrainResult:
    model: Model
    losses: list[float]


def train(config: ModelConfig, tcfg: TrainConfig, documents: Sequence[Document],
          labels: Sequence, vocab: Vocabulary | None = None,
          on_epoch: Callable[[int, float], None] | None = None) -> TrainResult:
    """Minimise mean per-sentence cross-entropy against oracle labels.

    ``labels[i]`` is an :class:`OracleLabels` (or index list) for
    ``documents[i]``. The returned loss curve holds the mean training loss
    of each epoch, accumulated while that epoch's updates were applied.
    """
    if not documents:
        raise EmptyTrainingSet("no training documents")
    if len(labels) != len(documents):
        raise ValueError("documents and labels differ in length")
    vocab = vocab if vocab is not None else Vocabulary.build(documents)
    config = replace(config, vocab_size=len(vocab))
    params = init_params(config)
    model = Model(config, params, vocab, unit=documents[0].unit)
    data = []
    for doc, lab in zip(documents, labels):
        sents = model.encode(doc)
        data.append((sents, targets_for(len(sents), lab)))
    optimizer = (_Adam if tcfg.optimizer == "adam" else _SGD)(params, tcfg)
    rng = np.random.default_rng(tcfg.seed)
    losses: list[float] = []
    last_good = _copy(params)
    for epoch in range(tcfg.epochs):
        order = rng.permutation(len(data))
        epoch_loss, epoch_count = 0.0, 0
        for start in range(0, len(order), tcfg.batch_size):
            batch = order[start:start + tcfg.batch_size]
            grads = {k: np.zeros_like(v) for k, v in params.items()}
            loss_sum, count = 0.0, 0
            for j in batch:
                sents, y = data[j]
                tape = DocumentTape(config, params, sents)
                total, dlogits = tape.loss(y)
                tape.backward(dlogits, grads)
                loss_sum += total
                count += len(y)
            if not np.isfinite(loss_sum):
                raise DivergedLoss(f"non-finite loss in epoch {epoch}",
                                   last_good=last_good, epoch=epoch)
            for g in grads.values():
                g /= count
            clip_gradients(grads, tcfg.clip_norm)
            last_good = _copy(params)
            optimizer.step(params, grads)
            epoch_loss += loss_sum
            epoch_count += count
        mean = epoch_loss / epoch_count
        losses.append(mean)
        if on_epoch is not None:
            on_epoch(epoch, mean)
    return TrainResult(model, losses)


def _copy(params):
    return {k: v.copy() for k, v in params.items()}


# -- persistence ----------------------------------------------------------------

def save_model(path: str | Path, model: Model) -> None:
    save_checkpoint(path, model.params, model.header())


def load_model(path: str | Path, unit: TokenUnit | str | None = None) -> Model:
    params, header = load_checkpoint(path)
    if header.get("format") != "sumforge-model":
        raise CheckpointMismatch(f"{path}: not a model checkpoint")
    vocab = Vocabulary(header["vocab"])
    if vocab.digest() != header["vocab_hash"]:
        raise CheckpointMismatch(f"{path}: vocabulary hash mismatch")
    cfg = ModelConfig(**header["model"])
    expected = param_shapes(cfg)
    actual = {k: v.shape for k, v in params.items()}
    if expected != actual:
        raise CheckpointMismatch(f"{path}: tensors do not match model config")
    ckpt_unit = TokenUnit.parse(header["unit"])
    if unit is not None and TokenUnit.parse(unit) is not ckpt_unit:
        raise CheckpointMismatch(
            f"{path}: checkpoint token unit {ckpt_unit.value!r}, documents use {TokenUnit.parse(unit).value!r}")
    meta = {k: v for k, v in header.items()
            if k not in ("format", "model", "vocab", "vocab_hash", "unit", "seed")}
    return Model(cfg, params, vocab, unit=ckpt_unit, meta=meta)
