"""Corpus ingestion: cleaning, sentence segmentation, tokenization, splits.

Records arrive either as line-delimited JSON (``{"id", "text", "summary",
"score"}``) or in the original LCSTS angle-bracket markup; both are turned
into :class:`RawRecord` and then into :class:`Document`.
"""

from __future__ import annotations

import json
import math
import random
import re
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import BadRatios, EmptyDocument, EmptyReference

NUM = "\u27e8num\u27e9"  # ⟨num⟩

_DIGITS_RE = re.compile(r"[0-9０-９]+")
_WS_RE = re.compile(r"\s+")
_ZERO_WIDTH = dict.fromkeys(map(ord, "\u200b\u200c\u200d\u2060\ufeff\u180e"))

_TERMINALS = set("。！？；!?;")
_CLOSERS = set("\"'”’」』）)]】》〉>")

_CHAR_TOKEN_RE = re.compile(re.escape(NUM) + r"|[A-Za-z]+|\S")


class TokenUnit(str, Enum):
    CHARACTER = "char"
    WORD = "word"

    @classmethod
    def parse(cls, value: "str | TokenUnit") -> "TokenUnit":
        if isinstance(value, TokenUnit):
            return value
        aliases = {"char": cls.CHARACTER, "character": cls.CHARACTER,
                   "word": cls.WORD, "whitespace-word": cls.WORD}
        try:
            return aliases[value]
        except KeyError:
            raise ValueError(f"unknown token unit {value!r}") from None


@dataclass(frozen=True)
class RawRecord:
    id: str
    text: str
    summary: str
    score: int | None = None


@dataclass
class Document:
    id: str
    sentences: list[list[str]]
    raw_sentences: list[str]
    reference: list[str]
    unit: TokenUnit = TokenUnit.CHARACTER

    def __post_init__(self):
        if not self.sentences:
            raise EmptyDocument(f"document {self.id!r} has no sentences")
        if len(self.raw_sentences) != len(self.sentences):
            raise ValueError("raw_sentences and sentences differ in length")
        if any(not s for s in self.sentences):
            raise ValueError(f"document {self.id!r} has an empty sentence")

    def to_json(self) -> dict:
        return {"id": self.id, "sentences": self.sentences,
                "raw_sentences": self.raw_sentences,
                "reference": self.reference, "unit": self.unit.value}

    @classmethod
    def from_json(cls, obj: dict) -> "Document":
        return cls(id=str(obj["id"]), sentences=[list(s) for s in obj["sentences"]],
                   raw_sentences=list(obj["raw_sentences"]),
                   reference=list(obj["reference"]),
                   unit=TokenUnit.parse(obj.get("unit", "char")))


def clean_text(text: str) -> str:
    """Strip control and zero-width characters, collapse whitespace and
    replace every run of decimal digits with the ``⟨num⟩`` placeholder."""
    text = text.translate(_ZERO_WIDTH)
    text = "".join(
        ch for ch in text
        if ch.isspace() or unicodedata.category(ch) != "Cc"
    )
    text = _WS_RE.sub(" ", text).strip()
    return _DIGITS_RE.sub(NUM, text)


def segment_sentences(text: str) -> list[str]:
    sentences = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] in _TERMINALS:
            j = i + 1
            while j < n and text[j] in _TERMINALS:
                j += 1
            while j < n and text[j] in _CLOSERS:
                j += 1
            sentences.append(text[start:j])
            start = i = j
        else:
            i += 1
    if start < n:
        sentences.append(text[start:])
    return [s for s in sentences if s]


def tokenize(sentence: str, unit: TokenUnit | str = TokenUnit.CHARACTER) -> list[str]:
    unit = TokenUnit.parse(unit)
    if unit is TokenUnit.WORD:
        return sentence.split()
    return _CHAR_TOKEN_RE.findall(sentence)


def build_document(record: RawRecord, unit: TokenUnit | str = TokenUnit.CHARACTER) -> Document:
    unit = TokenUnit.parse(unit)
    sentences, raws = [], []
    for raw in segment_sentences(clean_text(record.text)):
        tokens = tokenize(raw, unit)
        if tokens:
            sentences.append(tokens)
            raws.append(raw.strip())
    if not sentences:
        raise EmptyDocument(f"record {record.id!r}: no sentence survives cleaning")
    reference = tokenize(clean_text(record.summary), unit)
    if not reference:
        raise EmptyReference(f"record {record.id!r}: summary is empty after cleaning")
    return Document(id=record.id, sentences=sentences, raw_sentences=raws,
                    reference=reference, unit=unit)


def split_dataset(records: Sequence, ratios=(0.8, 0.1, 0.1), seed: int = 0):
    """Shuffle deterministically and cut into (train, validation, test).

    Validation and test sizes are floored; the remainder goes to training.
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise BadRatios(f"ratios must be three non-negative reals summing to 1, got {ratios!r}")
    items = list(records)
    random.Random(seed).shuffle(items)
    n = len(items)
    n_valid = math.floor(n * ratios[1] + 1e-9)
    n_test = math.floor(n * ratios[2] + 1e-9)
    n_train = n - n_valid - n_test
    return (items[:n_train], items[n_train:n_train + n_valid],
            items[n_train + n_valid:])


# -- readers -----------------------------------------------------------------

_LCSTS_DOC_RE = re.compile(r"<doc(?:\s+id\s*=\s*\"?([^\s>\"]+)\"?)?\s*>(.*?)</doc>", re.S)


def _lcsts_field(body: str, tag: str) -> str | None:
    m = re.search(rf"<{tag}>(.*?)</{tag}>", body, re.S)
    return m.group(1).strip() if m else None


def parse_lcsts(markup: str) -> Iterator[RawRecord]:
    """Yield records from LCSTS ``<doc>`` markup."""
    for n, m in enumerate(_LCSTS_DOC_RE.finditer(markup)):
        doc_id, body = m.group(1), m.group(2)
        label = _lcsts_field(body, "human_label")
        yield RawRecord(id=doc_id if doc_id is not None else str(n),
                        text=_lcsts_field(body, "short_text") or "",
                        summary=_lcsts_field(body, "summary") or "",
                        score=int(label) if label else None)


def lcsts_to_jsonl(markup: str) -> str:
    """Convert LCSTS markup into the line-delimited JSON record format."""
    lines = []
    for rec in parse_lcsts(markup):
        obj = {"id": rec.id, "text": rec.text, "summary": rec.summary}
        if rec.score is not None:
            obj["score"] = rec.score
        lines.append(json.dumps(obj, ensure_ascii=False))
    return "".join(line + "\n" for line in lines)


@dataclass
class ReadResult:
    records: list[RawRecord] = field(default_factory=list)
    bad_lines: list[tuple[int, str]] = field(default_factory=list)


def parse_jsonl_records(lines: Iterable[str]) -> ReadResult:
    out = ReadResult()
    seen = set()
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            rec_id = str(obj.get("id", lineno))
            if rec_id in seen:
                raise ValueError(f"duplicate id {rec_id!r}")
            score = obj.get("score")
            rec = RawRecord(id=rec_id, text=obj["text"], summary=obj["summary"],
                            score=int(score) if score is not None else None)
        except (ValueError, KeyError, TypeError) as exc:
            out.bad_lines.append((lineno, f"{type(exc).__name__}: {exc}"))
            continue
        seen.add(rec_id)
        out.records.append(rec)
    return out


def detect_format(text: str) -> str:
    for ch in text:
        if not ch.isspace():
            return "lcsts" if ch == "<" else "jsonl"
    return "jsonl"


def read_records(path: str | Path) -> ReadResult:
    """Read records from ``path``, sniffing LCSTS markup vs JSON lines."""
    text = Path(path).read_text(encoding="utf-8")
    if detect_format(text) == "lcsts":
        return ReadResult(records=list(parse_lcsts(text)))
    return parse_jsonl_records(text.splitlines())


def filter_by_score(records: Iterable[RawRecord], min_score: int | None):
    if min_score is None:
        return list(records)
    return [r for r in records if r.score is None or r.score >= min_score]


def read_documents(path: str | Path) -> list[Document]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                docs.append(Document.from_json(json.loads(line)))
    return docs
