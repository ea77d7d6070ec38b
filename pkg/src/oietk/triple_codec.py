"""Sequential triple string codec for seq2seq training targets.

Encoding renders each extraction as ``(subj ; pred ; obj)`` with slots
joined by single spaces, multiple extractions concatenated left to right.
Decoding is total: it scans arbitrary generated text for balanced
parenthesis groups and recovers whatever triples it can, reporting every
anomaly as a warning instead of failing. Whitespace around ``;`` is
optional on decode.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import ExtractionSet, Triple

TASK_PREFIX = "info_extract: "


def add_prefix(text: str) -> str:
    return TASK_PREFIX + text


def strip_prefix(text: str) -> str:
    if text.startswith(TASK_PREFIX):
        return text[len(TASK_PREFIX):]
    return text


@dataclass(frozen=True)
class ParseWarning:
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


def encode_triples(extractions: ExtractionSet) -> str:
    parts = []
    for t in extractions:
        slots = " ; ".join(" ".join(slot) for slot in t.slots())
        parts.append(f"({slots})")
    return " ".join(parts)


def _scan_groups(text: str) -> tuple[list[str], list[ParseWarning]]:
    """Greedy left-to-right scan for balanced ``( ... )`` groups; an opening
    group that never closes is dropped with a warning."""
    groups: list[str] = []
    warnings: list[ParseWarning] = []
    i = 0
    n = len(text)
    while i < n:
        if text[i] != "(":
            i += 1
            continue
        depth = 1
        j = i + 1
        while j < n and depth > 0:
            if text[j] == "(":
                depth += 1
            elif text[j] == ")":
                depth -= 1
            j += 1
        if depth > 0:
            warnings.append(
                ParseWarning("unbalanced", f"unclosed group dropped: {text[i:i+40]!r}")
            )
            break
        groups.append(text[i + 1 : j - 1])
        i = j
    return groups, warnings


def decode_triples(text: str, sentence_id: str = "") -> tuple[ExtractionSet, list[ParseWarning]]:
    """Recover triples from a generated string; never raises and never
    yields a triple with an empty predicate."""
    groups, warnings = _scan_groups(text)
    triples: list[Triple] = []
    for group in groups:
        parts = [p.strip() for p in group.split(";")]
        if len(parts) == 1:
            warnings.append(
                ParseWarning("no-semicolons", f"fragment dropped: ({group})")
            )
            continue
        subj = tuple(parts[0].split())
        pred = tuple(parts[1].split())
        if len(parts) == 2:
            obj: tuple[str, ...] = ()
            warnings.append(
                ParseWarning("missing-object", f"partial triple recovered: ({group})")
            )
        else:
            obj = tuple(" ".join(parts[2:]).split())
            if len(parts) > 3:
                warnings.append(
                    ParseWarning(
                        "extra-semicolons", f"merged into object: ({group})"
                    )
                )
        if not pred:
            warnings.append(
                ParseWarning("empty-predicate", f"triple dropped: ({group})")
            )
            continue
        triples.append(Triple(subj, pred, obj, partial=not subj or not obj))
    return ExtractionSet(sentence_id, tuple(triples)), warnings
