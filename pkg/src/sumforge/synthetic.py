"""Seeded synthetic corpora for experiments and smoke tests.

``overfit_corpus`` builds documents where exactly one sentence is made of
"salient" characters and the reference summary copies it, so the oracle
label is learnable from the document alone. ``sample_corpus`` builds noisier
LCSTS-like news records (digits, quotes, multi-sentence summaries).

Run ``python -m sumforge.synthetic --kind sample --n 200 --out corpus.jsonl``.
"""

from __future__ import annotations

import argparse
import json
import random
from pathlib import Path

from .corpus import RawRecord

SALIENT = list("政府宣布发布报告显示经济增长")
FILLER = list("今天天气很好我们一起去公园散步看见小鸟在树上唱歌孩子们玩耍老人下棋街道")
TERMINALS = ["。", "。", "。", "！", "？", "；"]


def _sentence(rng: random.Random, pool, lo=5, hi=9, end="。") -> str:
    return "".join(rng.choice(pool) for _ in range(rng.randint(lo, hi))) + end


def overfit_corpus(n_docs: int = 20, seed: int = 0, n_sentences: int = 4) -> list[RawRecord]:
    rng = random.Random(seed)
    records = []
    for d in range(n_docs):
        key = rng.randrange(n_sentences)
        sents = [_sentence(rng, SALIENT if i == key else FILLER) for i in range(n_sentences)]
        records.append(RawRecord(id=f"of{d:03d}", text="".join(sents), summary=sents[key][:-1]))
    return records


def _noisy_copy(rng: random.Random, chars: str, drop=0.2, insert=0.1) -> str:
    out = []
    for ch in chars:
        if rng.random() < drop:
            continue
        out.append(ch)
        if rng.random() < insert:
            out.append(rng.choice(SALIENT))
    return "".join(out)


def sample_corpus(n_docs: int = 200, seed: int = 0) -> list[RawRecord]:
    rng = random.Random(seed)
    records = []
    for d in range(n_docs):
        n = rng.randint(3, 6)
        keys = sorted(rng.sample(range(n), k=1 if rng.random() < 0.7 else 2))
        sents = []
        for i in range(n):
            pool = SALIENT + FILLER[:6] if i in keys else FILLER + SALIENT[:2]
            body = _sentence(rng, pool, end="")
            if rng.random() < 0.3:
                body += str(rng.randint(1, 2024)) + rng.choice("年月日")
            if rng.random() < 0.1:
                body = "“" + body
                sents.append(body + rng.choice(TERMINALS) + "”")
            else:
                sents.append(body + rng.choice(TERMINALS))
        summary = "".join(_noisy_copy(rng, sents[k].rstrip("。！？；”")) for k in keys)
        score = rng.choice([2, 3, 4, 5, 5])
        records.append(RawRecord(id=f"doc{d:04d}", text="".join(sents),
                                 summary=summary or sents[keys[0]], score=score))
    return records


def write_jsonl(path: str | Path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            obj = {"id": r.id, "text": r.text, "summary": r.summary}
            if r.score is not None:
                obj["score"] = r.score
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def write_lcsts(path: str | Path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(f"<doc id={r.id}>\n")
            if r.score is not None:
                fh.write(f"    <human_label>{r.score}</human_label>\n")
            fh.write(f"    <summary>\n        {r.summary}\n    </summary>\n")
            fh.write(f"    <short_text>\n        {r.text}\n    </short_text>\n</doc>\n")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="python -m sumforge.synthetic", description=__doc__.split("\n")[0])
    ap.add_argument("--kind", choices=("sample", "overfit"), default="sample")
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--format", choices=("jsonl", "lcsts"), default="jsonl")
    ap.add_argument("--out", required=True)
    args = ap.parse_args(argv)
    make = sample_corpus if args.kind == "sample" else overfit_corpus
    records = make(args.n, seed=args.seed)
    (write_jsonl if args.format == "jsonl" else write_lcsts)(args.out, records)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
