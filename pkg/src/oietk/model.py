"""Core domain types shared by every pipeline stage.

Tokens arrive pre-split (sources are already token-aligned), so nothing in
here re-tokenizes. All types are immutable after construction and safe to
share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable, Iterator


def normalize_token_text(raw: str) -> str:
    """Strip surrounding whitespace from a token; internal whitespace is
    left alone because tokens are pre-split upstream."""
    return raw.strip()


@dataclass(frozen=True)
class Token:
    text: str
    index: int

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("token text must be non-empty")
        if any(c.isspace() for c in self.text):
            raise ValueError(f"token text contains whitespace: {self.text!r}")
        if self.index < 0:
            raise ValueError(f"token index must be >= 0, got {self.index}")


@dataclass(frozen=True)
class Sentence:
    id: str
    tokens: tuple[Token, ...]

    def __post_init__(self) -> None:
        if len(self.tokens) < 1:
            raise ValueError(f"sentence {self.id!r} has no tokens")
        for pos, tok in enumerate(self.tokens):
            if tok.index != pos:
                raise ValueError(
                    f"sentence {self.id!r}: token index {tok.index} at position {pos}, "
                    "indices must be 0..N-1 contiguous"
                )

    @classmethod
    def from_texts(cls, sentence_id: str, texts: Iterable[str]) -> "Sentence":
        toks = tuple(
            Token(normalize_token_text(t), i) for i, t in enumerate(texts)
        )
        return cls(sentence_id, toks)

    @property
    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    def text(self) -> str:
        return " ".join(t.text for t in self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Triple:
    """One OIE extraction: (subject; predicate; object), each slot a
    token-text sequence.

    Slots hold token texts rather than source spans because generated
    outputs may contain words absent from the source sentence. A triple
    with an empty subject or object must carry ``partial=True``; such
    triples are parse-recovery products and are counted separately
    downstream.
    """

    subject: tuple[str, ...]
    predicate: tuple[str, ...]
    object: tuple[str, ...]
    partial: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "subject", tuple(self.subject))
        object.__setattr__(self, "predicate", tuple(self.predicate))
        object.__setattr__(self, "object", tuple(self.object))
        if not self.predicate:
            raise ValueError("triple predicate must be non-empty")
        if (not self.subject or not self.object) and not self.partial:
            raise ValueError(
                "empty subject/object requires the partial flag"
            )

    @classmethod
    def from_texts(cls, subject: str, predicate: str, obj: str) -> "Triple":
        """Build from whitespace-separated slot strings (test convenience)."""
        s, p, o = subject.split(), predicate.split(), obj.split()
        return cls(tuple(s), tuple(p), tuple(o), partial=not s or not o)

    def slots(self) -> tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]]:
        return (self.subject, self.predicate, self.object)

    def to_dict(self) -> dict:
        d: dict = {
            "subj": list(self.subject),
            "pred": list(self.predicate),
            "obj": list(self.object),
        }
        if self.partial:
            d["partial"] = True
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Triple":
        return cls(
            tuple(d["subj"]),
            tuple(d["pred"]),
            tuple(d["obj"]),
            partial=bool(d.get("partial", False)),
        )


def tuple_equal(a: Triple, b: Triple, case_fold: bool = False) -> bool:
    """Slot-wise equality of two triples as token-text lists.

    ``case_fold`` compares tokens case-insensitively; the partial flag is
    not part of the comparison (it is bookkeeping, not content).
    """
    if case_fold:
        fold = lambda slot: tuple(t.casefold() for t in slot)  # noqa: E731
        return all(fold(x) == fold(y) for x, y in zip(a.slots(), b.slots()))
    return a.slots() == b.slots()


@dataclass(frozen=True)
class ExtractionSet:
    """Ordered extractions for one sentence; order is the
    generation/annotation order and is preserved by serialization."""

    sentence_id: str
    tuples: tuple[Triple, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "tuples", tuple(self.tuples))

    def __len__(self) -> int:
        return len(self.tuples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self.tuples)


@dataclass(frozen=True)
class DatasetRecord:
    """One on-disk JSON-lines record: sentence id, its tokens and its
    extractions. ``tokens`` may be empty for records whose source sentence
    is unknown (e.g. parsed generation output)."""

    id: str
    tokens: tuple[str, ...] = ()
    tuples: tuple[Triple, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "tuples", tuple(self.tuples))

    @property
    def extractions(self) -> ExtractionSet:
        return ExtractionSet(self.id, self.tuples)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "tokens": list(self.tokens),
            "tuples": [t.to_dict() for t in self.tuples],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetRecord":
        return cls(
            str(d["id"]),
            tuple(d.get("tokens", ())),
            tuple(Triple.from_dict(t) for t in d.get("tuples", ())),
        )


def write_jsonl(records: Iterable[DatasetRecord], fh: IO[str]) -> int:
    """Write records as UTF-8 JSON-lines with LF endings; returns count."""
    n = 0
    for rec in records:
        fh.write(json.dumps(rec.to_dict(), ensure_ascii=False))
        fh.write("\n")
        n += 1
    return n


def read_jsonl(fh: IO[str]) -> Iterator[DatasetRecord]:
    for lineno, line in enumerate(fh, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            yield DatasetRecord.from_dict(json.loads(line))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ValueError(f"line {lineno}: bad dataset record: {exc}") from exc
