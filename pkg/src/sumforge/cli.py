"""``sumforge`` command-line entry point.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from pathlib import Path

from . import __version__
from .config import ConfigError, fingerprint, load_config, resolve
from .corpus import (Document, TokenUnit, build_document, clean_text, filter_by_score,
                     read_documents, read_records, split_dataset, tokenize)
from .errors import SumforgeError
from .harness import EvalReport, compare_models, evaluate_selections, write_per_document
from .models import (ModelConfig, ScorerKind, TrainConfig, load_model, save_model,
                     score_sentences, select_summary, train)
from .oracle import OracleConfig, label_dataset, read_labels, write_labels
from .rouge import score_tokens

log = logging.getLogger("sumforge")

SUBCOMMANDS = ("ingest", "oracle", "train", "summarize", "evaluate", "rouge", "gradcheck")


class UsageError(Exception):
    """Bad invocation or configuration; maps to exit status 2."""


def _require(path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {path}")
    return p


def _write_jsonl(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def _ratios(text):
    try:
        parts = tuple(float(x) for x in str(text).split(","))
    except ValueError:
        raise UsageError(f"bad split ratios {text!r}") from None
    if len(parts) != 3:
        raise UsageError(f"split needs three ratios, got {text!r}")
    return parts


# -- subcommands --------------------------------------------------------------

def cmd_ingest(cfg, args) -> int:
    src = _require(args.input)
    unit = TokenUnit.parse(cfg["corpus.unit"])
    read = read_records(src)
    dropped = Counter()
    for lineno, why in read.bad_lines:
        log.warning("%s:%d: %s", src, lineno, why)
        dropped["BadRecord"] += 1
    kept = filter_by_score(read.records, cfg["corpus.min_score"])
    dropped["LowScore"] += len(read.records) - len(kept)
    docs = []
    for rec in kept:
        try:
            docs.append(build_document(rec, unit))
        except SumforgeError as exc:
            log.info("dropping %s: %s", rec.id, exc)
            dropped[type(exc).__name__] += 1
    fp_payload = {"stage": "ingest", "unit": unit.value, "min_score": cfg["corpus.min_score"],
                  "split": cfg["corpus.split"], "seed": cfg["seed"]}
    fp = fingerprint(fp_payload)
    extra = {"fingerprint": fp, "seed": cfg["seed"]}
    out = Path(args.out)
    if cfg["corpus.split"]:
        parts = split_dataset(docs, _ratios(cfg["corpus.split"]), seed=cfg["seed"])
        for name, part in zip(("train", "valid", "test"), parts):
            path = out.with_name(f"{out.stem}.{name}{out.suffix or '.jsonl'}")
            _write_jsonl(path, ({**d.to_json(), **extra} for d in part))
            print(f"{name}: {len(part)} -> {path}")
    else:
        _write_jsonl(out, ({**d.to_json(), **extra} for d in docs))
    n_read = len(read.records) + len(read.bad_lines)
    total_dropped = sum(dropped.values())
    msg = f"read {n_read}, emitted {len(docs)}, dropped {total_dropped}"
    reasons = {k: v for k, v in sorted(dropped.items()) if v}
    if len(reasons) == 1:
        msg += f" ({next(iter(reasons))})"
    elif reasons:
        msg += " (" + ", ".join(f"{k}: {v}" for k, v in reasons.items()) + ")"
    print(msg)
    return 0


def _load_docs(path) -> list[Document]:
    return read_documents(_require(path))


def cmd_oracle(cfg, args) -> int:
    docs = _load_docs(args.docs)
    ocfg = OracleConfig(max_sentences=cfg["oracle.max_sentences"],
                        objective=cfg["oracle.objective"])
    result = label_dataset(docs, ocfg, threads=cfg["threads"])
    labels = [lab for lab in result.labels if lab is not None]
    fp = fingerprint({"stage": "oracle", "max_sentences": ocfg.max_sentences,
                      "objective": ocfg.objective.value, "seed": cfg["seed"],
                      "unit": docs[0].unit.value if docs else None})
    write_labels(args.out, labels, extra={"fingerprint": fp, "seed": cfg["seed"]})
    mean = sum(l.objective for l in labels) / len(labels) if labels else 0.0
    print(f"labeled {len(labels)} documents, failures {result.failure_count}, "
          f"mean objective {mean:.4f}")
    return 1 if result.failure_count and not labels else 0


_MODEL_ALIASES = {"lstm": "lstm_only", "bertsum": "bertsum", "bertsum-lstm": "bertsum_lstm"}


def cmd_train(cfg, args) -> int:
    docs = _load_docs(args.docs)
    labels_by_id = read_labels(_require(args.labels))
    pairs = [(d, labels_by_id[d.id]) for d in docs if d.id in labels_by_id]
    if len(pairs) < len(docs):
        log.warning("%d documents have no oracle labels and are skipped", len(docs) - len(pairs))
    kind = ScorerKind.parse(_MODEL_ALIASES.get(cfg["model.kind"], cfg["model.kind"]))
    mcfg = ModelConfig(kind=kind, d_model=cfg["model.d_model"], d_hidden=cfg["model.d_hidden"],
                       d_ff=cfg["model.d_ff"], max_len=cfg["model.max_len"], seed=cfg["seed"],
                       bidirectional=cfg["model.bidirectional"])
    tcfg = TrainConfig(learning_rate=cfg["train.learning_rate"], epochs=cfg["train.epochs"],
                       batch_size=cfg["train.batch_size"], seed=cfg["seed"],
                       optimizer=cfg["train.optimizer"], clip_norm=cfg["train.clip_norm"])
    result = train(mcfg, tcfg, [d for d, _ in pairs], [l for _, l in pairs],
                   on_epoch=lambda e, loss: log.info("epoch %d loss %.6f", e + 1, loss))
    model = result.model
    fp = fingerprint({"stage": "train", "model": model.config.to_json(), "train": tcfg.to_json(),
                      "vocab_hash": model.vocab.digest(), "unit": model.unit.value})
    model.meta.update({"fingerprint": fp, "train": tcfg.to_json()})
    save_model(args.out, model)
    loss_path = Path(args.loss_csv or f"{args.out}.loss.csv")
    with open(loss_path, "w", encoding="utf-8") as fh:
        fh.write(f"# fingerprint={fp} seed={cfg['seed']}\n")
        fh.write("epoch,mean_loss\n")
        for epoch, loss in enumerate(result.losses, 1):
            fh.write(f"{epoch},{loss!r}\n")
    final = f", final loss {result.losses[-1]:.6f}" if result.losses else ""
    print(f"trained {kind.display} on {len(pairs)} documents for {tcfg.epochs} epochs"
          f"{final} -> {args.out}")
    return 0


def cmd_summarize(cfg, args) -> int:
    docs = _load_docs(args.docs)
    model = load_model(_require(args.checkpoint), unit=docs[0].unit if docs else None)
    k = cfg["eval.k"]
    fp = fingerprint({"stage": "summarize", "model": model.meta.get("fingerprint"), "k": k})
    rows = []
    for doc in docs:
        sel = select_summary(score_sentences(model, doc), k)
        rows.append({"id": doc.id, "selected": sel,
                     "summary": [doc.raw_sentences[i] for i in sel],
                     "fingerprint": fp, "seed": cfg["seed"]})
    _write_jsonl(args.out, rows)
    print(f"summarized {len(rows)} documents -> {args.out}")
    return 0


def cmd_evaluate(cfg, args) -> int:
    docs = _load_docs(args.docs)
    k = cfg["eval.k"]
    paths = [p for p in args.checkpoints.split(",") if p] if args.checkpoints else []
    if not paths and not args.oracle_labels:
        raise UsageError("evaluate needs --checkpoints and/or --oracle-labels")
    unit = docs[0].unit if docs else None
    models = [load_model(_require(p), unit=unit) for p in paths]
    fp = fingerprint({"stage": "evaluate", "k": k, "seed": cfg["seed"],
                      "unit": unit.value if unit else None,
                      "models": [m.meta.get("fingerprint") for m in models]})
    report = compare_models(models, docs, k, fingerprint=fp, keep_per_document=True) \
        if models else None
    if args.oracle_labels:
        labels = read_labels(_require(args.oracle_labels))
        missing = [d.id for d in docs if d.id not in labels]
        if missing:
            raise SumforgeError(f"{len(missing)} documents lack oracle labels, e.g. {missing[0]}")
        results, row = evaluate_selections(docs, [labels[d.id].selected for d in docs])
        if report is None:
            report = EvalReport(rows=[], doc_count=len(docs), fingerprint=fp, k=k,
                                unit=unit.value if unit else "char")
        report.rows.append(row)
        report.per_document[row.name] = results
    text = report.render()
    print(text, end="")
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    if args.csv:
        Path(args.csv).write_text(report.to_csv(), encoding="utf-8")
    if args.per_doc:
        write_per_document(args.per_doc, report.per_document, fp)
    return 0


def _read_lines(path) -> list[str]:
    return _require(path).read_text(encoding="utf-8").splitlines()


def cmd_rouge(cfg, args) -> int:
    cand, ref = _read_lines(args.candidate), _read_lines(args.reference)
    if len(cand) != len(ref):
        raise SumforgeError(f"candidate has {len(cand)} lines, reference has {len(ref)}")
    if not cand:
        raise SumforgeError("no lines to score")
    unit = TokenUnit.parse(cfg["corpus.unit"])
    totals = {m: [0.0, 0.0, 0.0] for m in ("rouge1", "rouge2", "rougeL")}
    for c, r in zip(cand, ref):
        scores = score_tokens(tokenize(clean_text(c), unit), tokenize(clean_text(r), unit))
        for m, s in scores.items():
            for j, v in enumerate(s):
                totals[m][j] += v
    n = len(cand)
    labels = {"rouge1": "ROUGE-1", "rouge2": "ROUGE-2", "rougeL": "ROUGE-L"}
    for m, (p, r, f) in totals.items():
        print(f"{labels[m]}  P={p / n:.4f}  R={r / n:.4f}  F1={f / n:.4f}")
    return 0


def cmd_gradcheck(cfg, args) -> int:
    from .gradsuite import run_suite

    tol = cfg["gradcheck.tolerance"]
    entries = run_suite(seed=cfg["seed"], tolerance=tol, coords_per_param=args.coords or None)
    worst = 0.0
    for e in entries:
        worst = max(worst, e.report.worst)
        status = "ok" if e.report.passed else "FAIL"
        print(f"{e.name:<28} max_rel_error={e.report.worst:.3e}  "
              f"coords={e.report.total_coords}  {status}")
    print(f"max relative error: {worst:.3e} (tolerance {tol:g})")
    return 0 if worst < tol else 1


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sumforge", description="Extractive summarization toolkit.")
    ap.add_argument("--version", action="version", version=f"sumforge {__version__}")
    ap.add_argument("--config", help="key=value config file (flags override it)")
    ap.add_argument("--threads", dest="threads", type=int, help="cap on worker threads")
    ap.add_argument("--seed", dest="seed", type=int, help="random seed (default $SUMFORGE_SEED or 0)")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", metavar="{" + ",".join(SUBCOMMANDS) + "}")
    sub.required = True

    p = sub.add_parser("ingest", help="clean, segment and tokenize a raw corpus")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--unit", dest="corpus.unit", choices=("char", "word"))
    p.add_argument("--min-score", dest="corpus.min_score", type=int)
    p.add_argument("--split", dest="corpus.split", help="train,valid,test ratios, e.g. 0.8,0.1,0.1")

    p = sub.add_parser("oracle", help="greedy oracle sentence labels")
    p.add_argument("--docs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-sentences", dest="oracle.max_sentences", type=int)
    p.add_argument("--objective", dest="oracle.objective",
                   choices=("rouge1_f", "rouge2_f", "mean_r1_r2_f", "rougeL_f"))

    p = sub.add_parser("train", help="train a sentence scorer on oracle labels")
    p.add_argument("--docs", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--model", dest="model.kind", choices=tuple(_MODEL_ALIASES))
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", dest="train.epochs", type=int)
    p.add_argument("--lr", dest="train.learning_rate", type=float)
    p.add_argument("--batch", dest="train.batch_size", type=int)
    p.add_argument("--optimizer", dest="train.optimizer", choices=("adam", "sgd"))
    p.add_argument("--d-model", dest="model.d_model", type=int)
    p.add_argument("--d-hidden", dest="model.d_hidden", type=int)
    p.add_argument("--d-ff", dest="model.d_ff", type=int)
    p.add_argument("--max-len", dest="model.max_len", type=int)
    p.add_argument("--bidirectional", dest="model.bidirectional", action="store_const", const=True)
    p.add_argument("--loss-csv", help="per-epoch loss CSV (default: OUT.loss.csv)")

    p = sub.add_parser("summarize", help="select summary sentences with a trained model")
    p.add_argument("--docs", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--k", dest="eval.k", type=int)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="ROUGE comparison table over trained models")
    p.add_argument("--docs", required=True)
    p.add_argument("--checkpoints", help="comma-separated checkpoint paths")
    p.add_argument("--k", dest="eval.k", type=int)
    p.add_argument("--csv")
    p.add_argument("--report", help="also write the text report here")
    p.add_argument("--per-doc", help="line-delimited JSON of per-document scores")
    p.add_argument("--oracle-labels", help="add an oracle-playback row from this label file")

    p = sub.add_parser("rouge", help="score candidate lines against reference lines")
    p.add_argument("--candidate", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--unit", dest="corpus.unit", choices=("char", "word"))

    p = sub.add_parser("gradcheck", help="finite-difference check of all model gradients")
    p.add_argument("--tolerance", dest="gradcheck.tolerance", type=float)
    p.add_argument("--coords", type=int, default=0,
                   help="sampled coordinates per tensor (0 = every coordinate)")
    return ap


HANDLERS = {
    "ingest": cmd_ingest, "oracle": cmd_oracle, "train": cmd_train,
    "summarize": cmd_summarize, "evaluate": cmd_evaluate, "rouge": cmd_rouge,
    "gradcheck": cmd_gradcheck,
}


def run_subcommand(name: str, cfg: dict, args: argparse.Namespace) -> int:
    handler = HANDLERS.get(name)
    if handler is None:
        print(f"sumforge: unknown subcommand {name!r}", file=sys.stderr)
        return 2
    try:
        return handler(cfg, args)
    except (UsageError, ConfigError) as exc:
        print(f"sumforge {name}: error: {exc}", file=sys.stderr)
        return 2
    except (SumforgeError, ValueError, OSError, KeyError) as exc:
        print(f"sumforge {name}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    flags = {k: v for k, v in vars(args).items() if "." in k or k in ("seed", "threads")}
    try:
        cfg = resolve(flags, load_config(args.config))
        cfg["corpus.unit"] = TokenUnit.parse(cfg["corpus.unit"]).value
    except (ConfigError, ValueError) as exc:
        print(f"sumforge: config error: {exc}", file=sys.stderr)
        return 2
    return run_subcommand(args.command, cfg, args)


if __name__ == "__main__":
    sys.exit(main())
