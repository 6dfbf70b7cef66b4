"""Evaluation harness: per-document ROUGE, macro averages, comparison tables."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Sequence

from .corpus import Document
from .errors import EmptyTestSet
from .models import Model, load_model, score_sentences, select_summary
from .rouge import RougeScore, score_candidate

METRICS = ("rouge1", "rouge2", "rougeL")

# Published reference scores (pretrained encoder, full corpus), shown verbatim
# in report footers for context; never compared against.
PUBLISHED = (
    ("LSTM", "57.73", "45.55", "49.57"),
    ("BERTSum", "55.00", "42.33", "46.85"),
    ("BERTSum-LSTM", "62.29", "50.64", "51.49"),
)


@dataclass
class DocResult:
    id: str
    selected: list[int]
    scores: dict[str, RougeScore]

    def to_json(self) -> dict:
        return {"id": self.id, "selected": self.selected,
                **{m: s._asdict() for m, s in self.scores.items()}}


@dataclass(frozen=True)
class Row:
    """Macro-averaged F1 fractions for one model."""
    name: str
    rouge1: float
    rouge2: float
    rougeL: float
    docs: int

    def percent(self) -> tuple[str, str, str]:
        return tuple(percent(getattr(self, m)) for m in METRICS)


def percent(fraction: float) -> str:
    """``fraction`` x 100, rounded half-up to two decimals."""
    return str(Decimal(repr(fraction * 100)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def macro_average(results: Sequence[DocResult], name: str) -> Row:
    n = len(results)
    means = [math.fsum(r.scores[m].f1 for r in results) / n for m in METRICS]
    return Row(name, *means, docs=n)


def evaluate_selections(test: Sequence[Document], selections: Sequence[Sequence[int]],
                        name: str = "Oracle") -> tuple[list[DocResult], Row]:
    """Score fixed sentence selections (e.g. oracle playback)."""
    if not test:
        raise EmptyTestSet("empty test set")
    results = []
    for doc, sel in zip(test, selections, strict=True):
        sel = sorted(sel)
        chosen = [doc.sentences[i] for i in sel]
        results.append(DocResult(doc.id, sel, score_candidate(chosen, doc.reference)))
    return results, macro_average(results, name)


def evaluate(model: Model, test: Sequence[Document], k: int = 3,
             name: str | None = None) -> tuple[list[DocResult], Row]:
    if not test:
        raise EmptyTestSet("empty test set")
    selections = [select_summary(score_sentences(model, doc), k) for doc in test]
    return evaluate_selections(test, selections, name or model.kind.display)


@dataclass
class EvalReport:
    rows: list[Row]
    doc_count: int
    fingerprint: str
    k: int
    unit: str
    per_document: dict[str, list[DocResult]] = field(default_factory=dict)

    def render(self, timestamp: str | None = None) -> str:
        """Aligned plain-text table; the ``generated:`` line is the only
        run-dependent content."""
        stamp = timestamp or _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
        out = io.StringIO()
        out.write("ROUGE F1 x 100, macro-averaged over documents\n")
        out.write(f"documents: {self.doc_count}  k: {self.k}  unit: {self.unit}  "
                  f"fingerprint: {self.fingerprint}\n")
        out.write(f"generated: {stamp}\n\n")
        out.write(_table([(r.name, *r.percent()) for r in self.rows]))
        out.write("\nReference values (paper-reported, not reproduced; pretrained "
                  "BERT, full LCSTS):\n")
        out.write(_table(PUBLISHED))
        return out.getvalue()

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# fingerprint={self.fingerprint} k={self.k} unit={self.unit}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "rouge1", "rouge2", "rougeL", "docs"])
        for r in self.rows:
            w.writerow([r.name, *r.percent(), r.docs])
        return buf.getvalue()


def _table(rows) -> str:
    header = ("Model", "ROUGE-1", "ROUGE-2", "ROUGE-L")
    width = max(len(header[0]), *(len(r[0]) for r in rows))
    lines = [f"{header[0]:<{width}}  " + "  ".join(f"{h:>7}" for h in header[1:])]
    lines += [f"{r[0]:<{width}}  " + "  ".join(f"{v:>7}" for v in r[1:]) for r in rows]
    return "\n".join(lines) + "\n"


def compare_models(specs: Sequence, test: Sequence[Document], k: int = 3,
                   fingerprint: str = "", keep_per_document: bool = False) -> EvalReport:
    """Evaluate each model on the same test set and ``k``.

    ``specs`` entries are a :class:`Model`, a checkpoint path, or a
    ``(name, model_or_path)`` pair; rows keep the input order.
    """
    if not specs:
        raise ValueError("at least one model is required")
    rows, per_doc = [], {}
    for spec in specs:
        name, model = spec if isinstance(spec, tuple) else (None, spec)
        if not isinstance(model, Model):
            model = load_model(model)
        results, row = evaluate(model, test, k, name=name)
        rows.append(row)
        if keep_per_document:
            per_doc.setdefault(row.name, results)
    unit = test[0].unit.value if test else "char"
    return EvalReport(rows=rows, doc_count=len(test), fingerprint=fingerprint, k=k,
                      unit=unit, per_document=per_doc)


def write_per_document(path: str | Path, per_document: dict[str, Sequence[DocResult]],
                       fingerprint: str = "") -> None:
    """One JSON line per (model, document) pair."""
    with open(path, "w", encoding="utf-8") as fh:
        for model, results in per_document.items():
            for r in results:
                obj = {"model": model, "fingerprint": fingerprint, **r.to_json()}
                fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")


__all__ = ["DocResult", "EvalReport", "PUBLISHED", "Row", "compare_models",
           "evaluate", "evaluate_selections", "macro_average", "percent",
           "write_per_document"]
