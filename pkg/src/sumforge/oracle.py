"""Greedy oracle: extractive sentence labels from abstractive references."""

from __future__ import annotations

import itertools
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

from .corpus import Document
from .errors import EmptyDocument, LabelingError
from .rouge import score_candidate

log = logging.getLogger(__name__)


class Objective(str, Enum):
    ROUGE1_F = "rouge1_f"
    ROUGE2_F = "rouge2_f"
    MEAN_R1_R2_F = "mean_r1_r2_f"
    ROUGEL_F = "rougeL_f"


@dataclass(frozen=True)
class OracleConfig:
    max_sentences: int = 3
    objective: Objective = Objective.MEAN_R1_R2_F

    def __post_init__(self):
        if self.max_sentences < 1:
            raise ValueError("max_sentences must be >= 1")
        object.__setattr__(self, "objective", Objective(self.objective))


@dataclass
class OracleLabels:
    selected: list[int]
    objective: float
    per_step: list[tuple[int, float]] = field(default_factory=list)
    id: str | None = None

    def to_json(self) -> dict:
        return {"id": self.id, "selected": self.selected, "objective": self.objective}


def objective_value(scores, objective: Objective) -> float:
    if objective is Objective.ROUGE1_F:
        return scores["rouge1"].f1
    if objective is Objective.ROUGE2_F:
        return scores["rouge2"].f1
    if objective is Objective.ROUGEL_F:
        return scores["rougeL"].f1
    return (scores["rouge1"].f1 + scores["rouge2"].f1) / 2


def selection_objective(document: Document, selected: Sequence[int],
                        objective: Objective = Objective.MEAN_R1_R2_F) -> float:
    """Objective of a sentence subset, concatenated in document order."""
    chosen = [document.sentences[i] for i in sorted(selected)]
    return objective_value(score_candidate(chosen, document.reference), Objective(objective))


def greedy_oracle(document: Document, config: OracleConfig = OracleConfig()) -> OracleLabels:
    n = len(document.sentences)
    if n == 0:
        raise EmptyDocument(f"document {document.id!r} has no sentences")
    selected: list[int] = []
    steps: list[tuple[int, float]] = []
    best = 0.0
    while len(selected) < min(config.max_sentences, n):
        step_best, step_idx = -1.0, -1
        for i in range(n):
            if i in selected:
                continue
            value = selection_objective(document, selected + [i], config.objective)
            if value > step_best:
                step_best, step_idx = value, i
        if step_best > best or (not selected and step_best == 0.0):
            # second branch: nothing overlaps, keep the lowest index anyway
            selected.append(step_idx)
            steps.append((step_idx, step_best))
            best = step_best
            if step_best == 0.0:
                break
        else:
            break
    return OracleLabels(selected=sorted(selected), objective=best, per_step=steps,
                        id=document.id)


def exhaustive_oracle(document: Document, config: OracleConfig = OracleConfig()):
    """Best subset of at most ``max_sentences`` sentences by brute force.

    Returns ``(indices, objective)``. Exponential; meant for audits on tiny
    documents.
    """
    n = len(document.sentences)
    best_sel, best_val = (0,), -1.0
    for size in range(1, min(config.max_sentences, n) + 1):
        for combo in itertools.combinations(range(n), size):
            value = selection_objective(document, combo, config.objective)
            if value > best_val:
                best_sel, best_val = combo, value
    return list(best_sel), best_val


@dataclass
class LabelingResult:
    labels: list[OracleLabels | None]
    failures: list[LabelingError]

    @property
    def failure_count(self) -> int:
        return len(self.failures)


def label_dataset(documents: Sequence[Document], config: OracleConfig = OracleConfig(),
                  threads: int = 1) -> LabelingResult:
    """Run :func:`greedy_oracle` over ``documents`` preserving input order.

    A failing document leaves ``None`` in its slot and is recorded in
    ``failures`` with its id attached; the batch continues.
    """

    def one(doc):
        try:
            return greedy_oracle(doc, config), None
        except Exception as exc:  # noqa: BLE001 - reported per document
            return None, LabelingError(getattr(doc, "id", None), exc)

    if threads > 1 and len(documents) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, documents))
    else:
        results = [one(d) for d in documents]
    labels, failures = [], []
    for done, (lab, err) in enumerate(results, 1):
        labels.append(lab)
        if err is not None:
            log.warning("oracle failed: %s", err)
            failures.append(err)
        if done % 1000 == 0:
            log.info("labeled %d/%d documents", done, len(documents))
    return LabelingResult(labels, failures)


def write_labels(path: str | Path, labels: Sequence[OracleLabels], extra: dict | None = None):
    with open(path, "w", encoding="utf-8") as fh:
        for lab in labels:
            obj = lab.to_json()
            if extra:
                obj.update(extra)
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")


def read_labels(path: str | Path) -> dict[str, OracleLabels]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                out[str(obj["id"])] = OracleLabels(selected=list(obj["selected"]),
                                                   objective=float(obj["objective"]),
                                                   id=str(obj["id"]))
    return out
