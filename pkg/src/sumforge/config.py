"""Flat ``key=value`` run configuration and artifact fingerprints.

A config file holds one ``section.key=value`` pair per line; ``#`` starts a
comment. Command-line flags override file values, which override the
``SUMFORGE_SEED`` environment variable (seed only), which overrides
:data:`DEFAULTS`.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

DEFAULTS: dict[str, object] = {
    "seed": 0,
    "threads": os.cpu_count() or 1,
    "corpus.unit": "char",
    "corpus.min_score": None,
    "corpus.split": None,
    "oracle.max_sentences": 3,
    "oracle.objective": "mean_r1_r2_f",
    "model.kind": "bertsum_lstm",
    "model.d_model": 32,
    "model.d_hidden": 32,
    "model.d_ff": 64,
    "model.max_len": 64,
    "model.bidirectional": False,
    "train.learning_rate": 1e-3,
    "train.epochs": 10,
    "train.batch_size": 8,
    "train.optimizer": "adam",
    "train.clip_norm": 5.0,
    "eval.k": 3,
    "gradcheck.tolerance": 1e-4,
}

_INT_OR_NONE = {"corpus.min_score"}


class ConfigError(ValueError):
    pass


def _coerce(key: str, raw: str):
    default = DEFAULTS[key]
    try:
        if key in _INT_OR_NONE:
            return None if raw.lower() in ("", "none") else int(raw)
        if isinstance(default, bool):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return raw


def parse_config(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value")
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value.strip())
    return out


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def resolve(flags: dict, file_values: dict, env=os.environ) -> dict:
    """Merge defaults < environment < config file < flags (``None`` = unset)."""
    merged = dict(DEFAULTS)
    if env.get("SUMFORGE_SEED"):
        merged["seed"] = _coerce("seed", env["SUMFORGE_SEED"])
    merged.update(file_values)
    merged.update({k: v for k, v in flags.items() if v is not None})
    return merged


def fingerprint(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=False, default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]
