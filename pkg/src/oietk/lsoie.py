"""Conversion of per-predicate BIO tag rows into sequential triple form.

The source layout labels every sentence token once per extraction row with
one of A0..A5 / P begin-inside tags or O. A0 spans form the subject, P
spans the predicate, and A1 plus any higher-numbered arguments are folded
into the object in ascending role order. Word order inside each slot is
always source-sentence order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Iterable, Iterator

from .model import DatasetRecord, ExtractionSet, Sentence, Triple

ARG_ROLES = ("A0", "A1", "A2", "A3", "A4", "A5")
ROLES = ARG_ROLES + ("P",)
VALID_TAGS = frozenset(
    f"{role}-{mark}" for role in ROLES for mark in ("B", "I")
) | {"O"}

# object slot = A1 span followed by higher argument roles, ascending
OBJECT_ROLES = ARG_ROLES[1:]


class MalformedBio(ValueError):
    """Tag outside the inventory, or an I-tag without its B/I predecessor."""


class MissingPredicate(ValueError):
    """A BIO row with no P-* tag cannot yield a triple."""


@dataclass(frozen=True)
class BioRow:
    tags: tuple[str, ...]


@dataclass(frozen=True)
class BioExample:
    sentence: Sentence
    rows: tuple[BioRow, ...]

    def __post_init__(self) -> None:
        for i, row in enumerate(self.rows):
            if len(row.tags) != len(self.sentence):
                raise ValueError(
                    f"sentence {self.sentence.id!r}: row {i} has {len(row.tags)} "
                    f"tags for {len(self.sentence)} tokens"
                )


def _check_continuity(tags: tuple[str, ...], repair: bool) -> tuple[tuple[str, ...], bool]:
    """Validate I-follows-B/I-of-same-role; returns (tags, was_repaired).

    In repair mode a stray X-I is promoted to X-B, which never changes slot
    contents (grouping is by role, not by span) but keeps the row valid.
    """
    out = list(tags)
    repaired = False
    prev_role = None
    for i, tag in enumerate(tags):
        if tag == "O":
            prev_role = None
            continue
        role, mark = tag.rsplit("-", 1)
        if mark == "I" and role != prev_role:
            if not repair:
                raise MalformedBio(f"{tag} at position {i} does not continue a {role} span")
            out[i] = f"{role}-B"
            repaired = True
        prev_role = role
    return tuple(out), repaired


def bio_row_to_tuple(
    sentence: Sentence, row: BioRow, *, on_malformed: str = "repair"
) -> tuple[Triple, bool]:
    """Convert one BIO row to a triple; returns (triple, was_repaired).

    on_malformed: "repair" promotes stray I-tags to B, "strict" raises
    MalformedBio. Tags outside the inventory always raise MalformedBio;
    rows without any P-* tag raise MissingPredicate.
    """
    if on_malformed not in ("repair", "strict"):
        raise ValueError(f"on_malformed must be 'repair' or 'strict', got {on_malformed!r}")
    if len(row.tags) != len(sentence):
        raise ValueError("row is not parallel to sentence")
    for tag in row.tags:
        if tag not in VALID_TAGS:
            raise MalformedBio(f"unknown tag {tag!r}")
    tags, repaired = _check_continuity(row.tags, repair=on_malformed == "repair")

    by_role: dict[str, list[str]] = {role: [] for role in ROLES}
    for tok, tag in zip(sentence.tokens, tags):
        if tag == "O":
            continue
        role = tag.rsplit("-", 1)[0]
        by_role[role].append(tok.text)

    if not by_role["P"]:
        raise MissingPredicate(f"sentence {sentence.id!r}: row has no P-* tag")

    subject = tuple(by_role["A0"])
    predicate = tuple(by_role["P"])
    obj: list[str] = []
    for role in OBJECT_ROLES:
        obj.extend(by_role[role])
    partial = not subject or not obj
    return Triple(subject, predicate, tuple(obj), partial=partial), repaired


@dataclass
class ConversionReport:
    sentences: int = 0
    rows_total: int = 0
    rows_converted: int = 0
    rows_dropped: int = 0
    dropped_missing_predicate: int = 0
    dropped_malformed: int = 0
    repaired_rows: int = 0
    partial_tuples: int = 0

    def merge(self, other: "ConversionReport") -> None:
        self.sentences += other.sentences
        self.rows_total += other.rows_total
        self.rows_converted += other.rows_converted
        self.rows_dropped += other.rows_dropped
        self.dropped_missing_predicate += other.dropped_missing_predicate
        self.dropped_malformed += other.dropped_malformed
        self.repaired_rows += other.repaired_rows
        self.partial_tuples += other.partial_tuples

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def bio_example_to_extractions(
    example: BioExample, *, on_malformed: str = "repair"
) -> tuple[ExtractionSet, ConversionReport]:
    """Convert every valid row, in row order; per-row errors are counted in
    the report instead of raised."""
    report = ConversionReport(sentences=1, rows_total=len(example.rows))
    triples: list[Triple] = []
    for row in example.rows:
        try:
            triple, repaired = bio_row_to_tuple(
                example.sentence, row, on_malformed=on_malformed
            )
        except MissingPredicate:
            report.rows_dropped += 1
            report.dropped_missing_predicate += 1
            continue
        except MalformedBio:
            report.rows_dropped += 1
            report.dropped_malformed += 1
            continue
        triples.append(triple)
        report.rows_converted += 1
        if repaired:
            report.repaired_rows += 1
        if triple.partial:
            report.partial_tuples += 1
    return ExtractionSet(example.sentence.id, tuple(triples)), report


def parse_lsoie(fh: IO[str] | Iterable[str]) -> Iterator[BioExample]:
    """Read the token-per-line tabular layout: column 0 is the token, every
    further column is one extraction row's BIO tag; blank line between
    sentences. ``# id = X`` comment lines set the sentence id, otherwise
    ids are sequential ``s0, s1, ...``.
    """
    counter = 0
    pending_id: str | None = None
    tokens: list[str] = []
    columns: list[list[str]] = []
    lineno_start = 1

    def flush(lineno: int) -> BioExample | None:
        nonlocal counter, pending_id, tokens, columns
        if not tokens:
            pending_id = None
            return None
        sent_id = pending_id if pending_id is not None else f"s{counter}"
        counter += 1
        sentence = Sentence.from_texts(sent_id, tokens)
        rows = tuple(BioRow(tuple(col)) for col in columns)
        tokens, columns, pending_id = [], [], None
        return BioExample(sentence, rows)

    for lineno, line in enumerate(fh, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            ex = flush(lineno)
            if ex is not None:
                yield ex
            lineno_start = lineno + 1
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("id"):
                _, _, value = body.partition("=")
                pending_id = value.strip()
            continue
        fields = line.split("\t") if "\t" in line else line.split()
        token, tags = fields[0], fields[1:]
        if not tokens:
            columns = [[] for _ in tags]
        elif len(tags) != len(columns):
            raise ValueError(
                f"line {lineno}: {len(tags)} tag columns, expected {len(columns)} "
                f"(sentence starting at line {lineno_start})"
            )
        tokens.append(token)
        for col, tag in zip(columns, tags):
            col.append(tag)
    ex = flush(-1)
    if ex is not None:
        yield ex


def convert_corpus(
    examples: Iterable[BioExample], *, on_malformed: str = "repair"
) -> tuple[list[DatasetRecord], ConversionReport]:
    """Convert a whole corpus; deterministic given identical input."""
    report = ConversionReport()
    records: list[DatasetRecord] = []
    for example in examples:
        extractions, per = bio_example_to_extractions(example, on_malformed=on_malformed)
        report.merge(per)
        records.append(
            DatasetRecord(
                example.sentence.id,
                tuple(example.sentence.texts),
                extractions.tuples,
            )
        )
    return records, report
