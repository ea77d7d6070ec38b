"""Command-line pipeline driver.

Subcommands: convert, filter, stats, tanl gen, tanl parse, merge, align,
score, gradcheck, validate-tags. Every stage streams records in input
order, emits deterministic output, and reports both a human-readable
summary and (via --json-report) a machine-readable one. Flag values win
over config-file values, which win over built-in defaults; OIETK_JOBS sets
the default worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import nullcontext
from functools import partial
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import clausie, kernel, lsoie, scorer, tags, tanl, triple_codec
from .model import DatasetRecord, ExtractionSet, read_jsonl, write_jsonl

ENV_JOBS = "OIETK_JOBS"

# flat key = value config; key names mirror the trainer hyperparameters
# (learning_rate, batch_size, epochs, max_token_length) plus pipeline knobs
CONFIG_KEYS = {
    "learning_rate": float,
    "batch_size": int,
    "epochs": int,
    "max_token_length": int,
    "seed": int,
    "jobs": int,
    "case_fold": lambda v: v.lower() in ("1", "true", "yes"),
}


def load_config(path: str | Path) -> dict:
    config: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                key, sep, value = line.partition(":")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key = key.strip().lower().replace(" ", "_").replace("-", "_")
            value = value.strip()
            caster = CONFIG_KEYS.get(key, str)
            try:
                config[key] = caster(value)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return config


def _resolve(flag_value, config: dict, key: str, default):
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    if key == "jobs" and os.environ.get(ENV_JOBS):
        return int(os.environ[ENV_JOBS])
    return default


def _pmap(fn: Callable, items: Sequence, jobs: int) -> list:
    """Apply fn to every item; with jobs > 1 a process pool is used but the
    output order always equals the input order."""
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (jobs * 4))))


def _emit_json_report(args, payload: dict) -> None:
    path = getattr(args, "json_report", None)
    if not path:
        return
    text = json.dumps(payload, indent=2, ensure_ascii=False)
    if path == "-":
        print(text)
    else:
        Path(path).write_text(text + "\n", encoding="utf-8")


def _open_out(path: str):
    if path == "-":
        return nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# convert
# ---------------------------------------------------------------------------


def _convert_one(example: lsoie.BioExample, on_malformed: str):
    extractions, report = lsoie.bio_example_to_extractions(example, on_malformed=on_malformed)
    record = DatasetRecord(
        example.sentence.id, tuple(example.sentence.texts), extractions.tuples
    )
    return record, report


def cmd_convert(args, config: dict) -> int:
    jobs = _resolve(args.jobs, config, "jobs", 1)
    on_malformed = "strict" if args.strict_bio else "repair"
    try:
        with open(args.input, encoding="utf-8") as fh:
            examples = list(lsoie.parse_lsoie(fh))
    except ValueError as exc:
        print(f"{args.input}: {exc}", file=sys.stderr)
        return 1
    results = _pmap(partial(_convert_one, on_malformed=on_malformed), examples, jobs)
    report = lsoie.ConversionReport()
    with _open_out(args.output) as out:
        for record, per in results:
            report.merge(per)
            write_jsonl([record], out)
    print(
        f"convert: {report.sentences} sentences, {report.rows_converted} tuples, "
        f"{report.rows_dropped} rows dropped "
        f"({report.dropped_missing_predicate} no-predicate, "
        f"{report.dropped_malformed} malformed), "
        f"{report.repaired_rows} repaired, {report.partial_tuples} partial"
    )
    _emit_json_report(args, report.to_dict())
    return 0


# ---------------------------------------------------------------------------
# filter
# ---------------------------------------------------------------------------


def _filter_one(record: DatasetRecord, case_fold: bool) -> DatasetRecord:
    filtered = clausie.filter_extractions(record.extractions, case_fold=case_fold)
    return DatasetRecord(record.id, record.tokens, filtered.tuples)


def _sniff_jsonl(path: str) -> bool:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                return line.startswith("{")
    return True


def cmd_filter(args, config: dict) -> int:
    jobs = _resolve(args.jobs, config, "jobs", 1)
    case_fold = _resolve(args.case_fold, config, "case_fold", False)
    with open(args.input, encoding="utf-8") as fh:
        if _sniff_jsonl(args.input):
            raw = list(clausie.parse_clausie_jsonl(fh))
        else:
            raw = list(clausie.parse_clausie_text(fh))
    dataset, report = clausie.ingest_corpus(raw)
    filtered = _pmap(partial(_filter_one, case_fold=case_fold), dataset, jobs)
    triples_out = sum(len(r.tuples) for r in filtered)
    with _open_out(args.output) as out:
        write_jsonl(filtered, out)
    print(
        f"filter: {report.sentences_kept}/{report.sentences_in} sentences kept "
        f"(drop ratio {report.drop_ratio:.3f}), {report.format_errors} format errors, "
        f"{report.triples_in} triples in, {triples_out} out"
    )
    payload = report.to_dict()
    payload["triples_out"] = triples_out
    _emit_json_report(args, payload)
    return 0


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------


def cmd_stats(args, config: dict) -> int:
    sentences = 0
    tuples = 0
    partial = 0
    with open(args.input, encoding="utf-8") as fh:
        for record in read_jsonl(fh):
            sentences += 1
            tuples += len(record.tuples)
            partial += sum(1 for t in record.tuples if t.partial)
    per = tuples / sentences if sentences else 0.0
    print(f"{'sentences':20s}{sentences:>10d}")
    print(f"{'tuples':20s}{tuples:>10d}")
    print(f"{'tuples/sentence':20s}{per:>10.2f}")
    print(f"{'partial tuples':20s}{partial:>10d}")
    _emit_json_report(
        args,
        {
            "sentences": sentences,
            "tuples": tuples,
            "tuples_per_sentence": per,
            "partial_tuples": partial,
        },
    )
    return 0


# ---------------------------------------------------------------------------
# tanl gen / tanl parse / merge
# ---------------------------------------------------------------------------


def _verb_indices(ts: tags.TaggedSentence) -> list[int]:
    layer = ts.layers.get(tags.KIND_POS)
    if layer is None:
        return []
    return [i for i, tag in enumerate(layer.entries) if tag.startswith("VB")]


def cmd_tanl_gen(args, config: dict) -> int:
    n_inputs = 0
    no_verbs = 0
    with open(args.input, encoding="utf-8") as fh, _open_out(args.output) as out:
        for ts in tags.read_interchange(fh):
            verbs = _verb_indices(ts)
            if not verbs:
                no_verbs += 1
                continue
            for vin in tanl.make_verb_inputs(ts.sentence, verbs):
                out.write(
                    json.dumps(
                        {"id": vin.sentence_id, "verb_index": vin.verb_index, "input": vin.text},
                        ensure_ascii=False,
                    )
                    + "\n"
                )
                n_inputs += 1
    print(f"tanl gen: {n_inputs} inputs written, {no_verbs} sentences without verbs")
    _emit_json_report(args, {"inputs": n_inputs, "sentences_without_verbs": no_verbs})
    return 0


def cmd_tanl_parse(args, config: dict) -> int:
    n_records = 0
    n_warnings = 0
    with open(args.input, encoding="utf-8") as fh, _open_out(args.output) as out:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                rec_id, text = str(obj["id"]), str(obj["output"])
            except (json.JSONDecodeError, KeyError) as exc:
                print(f"{args.input}:{lineno}: bad record: {exc}", file=sys.stderr)
                return 1
            extractions, warnings = tanl.decode_tanl(text, rec_id)
            n_warnings += len(warnings)
            write_jsonl([DatasetRecord(rec_id, (), extractions.tuples)], out)
            n_records += 1
    print(f"tanl parse: {n_records} outputs parsed, {n_warnings} warnings")
    _emit_json_report(args, {"records": n_records, "warnings": n_warnings})
    return 0


def cmd_merge(args, config: dict) -> int:
    groups: dict[str, list[ExtractionSet]] = {}
    order: list[str] = []
    tokens: dict[str, tuple[str, ...]] = {}
    with open(args.input, encoding="utf-8") as fh:
        for record in read_jsonl(fh):
            if record.id not in groups:
                groups[record.id] = []
                order.append(record.id)
            groups[record.id].append(record.extractions)
            if record.tokens:
                tokens.setdefault(record.id, record.tokens)
    with _open_out(args.output) as out:
        for rec_id in order:
            merged = tanl.merge_verb_outputs(groups[rec_id])
            write_jsonl([DatasetRecord(rec_id, tokens.get(rec_id, ()), merged.tuples)], out)
    print(f"merge: {sum(len(g) for g in groups.values())} records merged into {len(order)}")
    return 0


# ---------------------------------------------------------------------------
# align
# ---------------------------------------------------------------------------


def cmd_align(args, config: dict) -> int:
    with open(args.tags, encoding="utf-8") as fh:
        tagged = {ts.sentence.id: ts for ts in tags.read_interchange(fh)}
    n = 0
    with _open_out(args.output) as out:
        if args.alignments:
            source: Iterable[tuple[str, tags.SubwordAlignment]] = []
            with open(args.alignments, encoding="utf-8") as fh:
                source = [
                    (str(obj["id"]), tags.SubwordAlignment.from_dict(obj))
                    for obj in map(json.loads, filter(str.strip, fh))
                ]
        else:
            source = [
                (ts.sentence.id, tags.whitespace_alignment(ts.sentence))
                for ts in tagged.values()
            ]
        for rec_id, alignment in source:
            ts = tagged.get(rec_id)
            if ts is None:
                print(f"align: no tags for sentence {rec_id!r}", file=sys.stderr)
                return 1
            aligned = tags.align_tags(
                ts, alignment, args.kind, first_subword_only=args.first_subword_only
            )
            out.write(
                json.dumps(
                    {
                        "id": rec_id,
                        "subwords": list(alignment.subword_texts),
                        "tags": aligned,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
            n += 1
    print(f"align: {n} sentences aligned on the {args.kind} layer")
    return 0


# ---------------------------------------------------------------------------
# score
# ---------------------------------------------------------------------------


def _read_extraction_sets(path: str) -> list[ExtractionSet]:
    with open(path, encoding="utf-8") as fh:
        return [rec.extractions for rec in read_jsonl(fh)]


def cmd_score(args, config: dict) -> int:
    golds = _read_extraction_sets(args.gold)
    preds = _read_extraction_sets(args.pred)
    pairs, missing_pred, missing_gold = scorer.join_by_id(golds, preds)
    for rec_id in missing_pred:
        print(f"score: no prediction for sentence {rec_id!r}", file=sys.stderr)
    for rec_id in missing_gold:
        print(f"score: no gold for sentence {rec_id!r}", file=sys.stderr)
    report = scorer.score_corpus(
        pairs, macro=args.macro, one_to_one_precision=args.one_to_one_precision
    )
    report.skipped_missing_pred = len(missing_pred)
    report.skipped_missing_gold = len(missing_gold)
    print(report.format_table())
    _emit_json_report(args, report.to_dict(include_sentences=not args.summary_only))
    if (missing_pred or missing_gold) and not args.allow_missing:
        return 1
    return 0


# ---------------------------------------------------------------------------
# gradcheck
# ---------------------------------------------------------------------------


def cmd_gradcheck(args, config: dict) -> int:
    seed = _resolve(args.seed, config, "seed", 0)
    cases = kernel.run_gradcheck(seed=seed)
    failures = [c for c in cases if not c.ok]
    for c in cases:
        if not c.ok or args.verbose:
            status = "ok" if c.ok else "FAIL"
            print(
                f"{status} {c.kind} d={c.dim} n={c.length} seed={c.seed} "
                f"max_err={c.max_error:.3e} params={c.n_params}"
            )
    _emit_json_report(
        args,
        {
            "seed": seed,
            "cases": len(cases),
            "failures": len(failures),
            "max_error": max(c.max_error for c in cases),
        },
    )
    if failures:
        print(f"gradcheck: {len(failures)}/{len(cases)} cases failed")
        return 1
    print(f"all checks passed ({len(cases)} cases, seed {seed})")
    return 0


# ---------------------------------------------------------------------------
# validate-tags
# ---------------------------------------------------------------------------


def cmd_validate_tags(args, config: dict) -> int:
    with open(args.input, encoding="utf-8") as fh:
        sentences, issues = tags.validate_interchange(fh)
    for issue in issues:
        print(str(issue), file=sys.stderr)
    counts = {kind: len(tags.distinct_tags(sentences, kind)) for kind in tags.KINDS}
    inventory = {kind: tags.inventory_size(kind) for kind in tags.KINDS}
    print(
        f"validate-tags: {len(sentences)} sentences, {len(issues)} issues; "
        "distinct tags "
        + ", ".join(f"{k}={counts[k]}/{inventory[k]}" for k in tags.KINDS)
    )
    _emit_json_report(
        args,
        {
            "sentences": len(sentences),
            "issues": [
                {"sentence_id": i.sentence_id, "lineno": i.lineno, "message": i.message}
                for i in issues
            ],
            "distinct_tags": counts,
            "inventory_sizes": inventory,
        },
    )
    return 0 if not issues else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oietk", description="OIE dataset pipeline toolkit"
    )
    parser.add_argument("--config", help="flat key = value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, jobs=False):
        p.add_argument("--json-report", metavar="PATH", help="write a JSON report ('-' for stdout)")
        if jobs:
            p.add_argument("--jobs", type=int, default=None, help=f"worker processes (default ${ENV_JOBS} or 1)")

    p = sub.add_parser("convert", help="BIO corpus to JSON-lines triples")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--strict-bio", action="store_true", help="reject malformed rows instead of repairing")
    add_common(p, jobs=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("filter", help="ingest raw extractions, drop failures and subsumed triples")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--case-fold", action="store_true", default=None, help="compare slots case-insensitively")
    add_common(p, jobs=True)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("stats", help="dataset counts")
    p.add_argument("input")
    add_common(p)
    p.set_defaults(func=cmd_stats)

    p_tanl = sub.add_parser("tanl", help="augmented-language codec stages")
    tanl_sub = p_tanl.add_subparsers(dest="tanl_command", required=True)

    p = tanl_sub.add_parser("gen", help="per-verb bracketed inputs from a tags TSV")
    p.add_argument("input", help="interchange TSV with a PoS layer")
    p.add_argument("output")
    add_common(p)
    p.set_defaults(func=cmd_tanl_gen)

    p = tanl_sub.add_parser("parse", help="decode generated outputs to JSON-lines")
    p.add_argument("input", help='JSON-lines {"id", "output"}')
    p.add_argument("output")
    add_common(p)
    p.set_defaults(func=cmd_tanl_parse)

    p = sub.add_parser("merge", help="merge per-verb records by sentence id")
    p.add_argument("input")
    p.add_argument("output")
    add_common(p)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("align", help="project word tags onto subword streams")
    p.add_argument("tags", help="interchange TSV")
    p.add_argument("output")
    p.add_argument("--alignments", help='JSON-lines {"id", "subwords", "words"}; omitted: one subword per word')
    p.add_argument("--kind", choices=list(tags.KINDS), default=tags.KIND_POS)
    p.add_argument("--first-subword-only", action="store_true")
    add_common(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("score", help="precision/recall/F1 of predictions against gold")
    p.add_argument("gold")
    p.add_argument("pred")
    p.add_argument("--allow-missing", action="store_true", help="exit 0 despite id mismatches")
    p.add_argument("--macro", action="store_true", help="macro-average instead of micro")
    p.add_argument("--one-to-one-precision", action="store_true")
    p.add_argument("--summary-only", action="store_true", help="omit per-sentence detail from the JSON report")
    add_common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("gradcheck", help="finite-difference verification of both kernels")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--verbose", action="store_true", help="print every case")
    add_common(p)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("validate-tags", help="check an interchange TSV against the layer invariants")
    p.add_argument("input")
    add_common(p)
    p.set_defaults(func=cmd_validate_tags)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {}
    if args.config:
        try:
            config = load_config(args.config)
        except (OSError, ValueError) as exc:
            print(f"config: {exc}", file=sys.stderr)
            return 2
    try:
        return args.func(args, config)
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
