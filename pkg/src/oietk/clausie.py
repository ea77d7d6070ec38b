"""Ingestion of captured clause-extractor output plus redundancy filtering.

Rule-based extractors tend to emit one triple per clause variant, so a
sentence often carries a short triple whose information is wholly contained
in a longer one. Such subsumed triples are removed, keeping the triple that
carries more information. Sentences where the extractor crashed (marked in
the capture) are dropped and counted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Sequence

from .model import DatasetRecord, ExtractionSet, Triple, tuple_equal


class FormatError(ValueError):
    """A capture line that cannot be parsed as a triple."""


def _is_contiguous_subsequence(a: Sequence[str], b: Sequence[str]) -> bool:
    # empty slot is trivially contained
    if len(a) > len(b):
        return False
    n = len(a)
    for start in range(len(b) - n + 1):
        if tuple(b[start : start + n]) == tuple(a):
            return True
    return False


def is_subsumed(a: Triple, b: Triple, *, case_fold: bool = False) -> bool:
    """True iff every slot of ``a`` is a contiguous token subsequence of the
    corresponding slot of ``b`` and the triples differ, i.e. all of ``a``'s
    information is already contained in ``b``."""
    if tuple_equal(a, b, case_fold):
        return False
    fold = (lambda s: tuple(t.casefold() for t in s)) if case_fold else tuple
    return all(
        _is_contiguous_subsequence(fold(sa), fold(sb))
        for sa, sb in zip(a.slots(), b.slots())
    )


def filter_extractions(extractions: ExtractionSet, *, case_fold: bool = False) -> ExtractionSet:
    """Drop exact duplicates (keep-first) and every triple subsumed by
    another triple of the set; survivor order equals input order."""
    unique: list[Triple] = []
    for t in extractions:
        if not any(tuple_equal(t, kept, case_fold) for kept in unique):
            unique.append(t)
    survivors = [
        t
        for t in unique
        if not any(is_subsumed(t, other, case_fold=case_fold) for other in unique)
    ]
    return ExtractionSet(extractions.sentence_id, tuple(survivors))


@dataclass
class RawRecord:
    """One captured record: a sentence, its raw triples, or a failure mark."""

    id: str
    tokens: tuple[str, ...] = ()
    triples: tuple[Triple, ...] = ()
    failed: bool = False
    format_errors: int = 0


@dataclass
class IngestReport:
    sentences_in: int = 0
    sentences_kept: int = 0
    sentences_failed: int = 0
    format_errors: int = 0
    triples_in: int = 0

    @property
    def drop_ratio(self) -> float:
        if self.sentences_in == 0:
            return 0.0
        return self.sentences_failed / self.sentences_in

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["drop_ratio"] = self.drop_ratio
        return d


def parse_triple_line(line: str) -> Triple:
    """Parse a ``(subj; pred; obj)`` line; raises FormatError."""
    text = line.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise FormatError(f"triple line not parenthesized: {line!r}")
    parts = [p.strip() for p in text[1:-1].split(";")]
    if len(parts) < 3:
        raise FormatError(f"triple line has {len(parts) - 1} semicolons, need 2: {line!r}")
    subj = tuple(parts[0].split())
    pred = tuple(parts[1].split())
    obj = tuple(" ".join(parts[2:]).split())
    if not pred:
        raise FormatError(f"triple line has empty predicate: {line!r}")
    return Triple(subj, pred, obj, partial=not subj or not obj)


def parse_clausie_text(fh: IO[str] | Iterable[str]) -> Iterator[RawRecord]:
    """Read the textual capture format: a header line (``id<TAB>sentence``,
    or just the sentence) starts a record; subsequent ``( ...; ...; ... )``
    lines are its triples; a line starting with ``!`` marks extraction
    failure. Records are separated by the next header line; blank lines and
    ``#`` comments are skipped.
    """
    counter = 0
    current: RawRecord | None = None
    for line in fh:
        line = line.rstrip("\n")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("(") and current is not None:
            try:
                triple = parse_triple_line(stripped)
            except FormatError:
                current.format_errors += 1
                continue
            current.triples = current.triples + (triple,)
        elif stripped.startswith("!") and current is not None:
            current.failed = True
        else:
            if current is not None:
                yield current
            if "\t" in line:
                rec_id, _, text = line.partition("\t")
                rec_id = rec_id.strip()
            else:
                rec_id, text = f"c{counter}", line
            counter += 1
            current = RawRecord(rec_id, tokens=tuple(text.split()))
    if current is not None:
        yield current


def parse_clausie_jsonl(fh: IO[str] | Iterable[str]) -> Iterator[RawRecord]:
    """Accept the core JSON-lines dataset as capture input; a record with
    ``"failed": true`` is a failure marker."""
    for lineno, line in enumerate(fh, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            d = json.loads(line)
            failed = bool(d.pop("failed", False))
            rec = DatasetRecord.from_dict(d)
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
        yield RawRecord(rec.id, rec.tokens, rec.tuples, failed=failed)


def ingest_corpus(
    records: Iterable[RawRecord],
) -> tuple[list[DatasetRecord], IngestReport]:
    """Drop failure-marked sentences, keep the rest; counts in the report."""
    report = IngestReport()
    dataset: list[DatasetRecord] = []
    for rec in records:
        report.sentences_in += 1
        report.format_errors += rec.format_errors
        if rec.failed:
            report.sentences_failed += 1
            continue
        report.sentences_kept += 1
        report.triples_in += len(rec.triples)
        dataset.append(DatasetRecord(rec.id, rec.tokens, rec.triples))
    return dataset, report
