"""Augmented-language codec with per-verb input multiplexing.

Each candidate verb of a sentence yields one model input with that verb
bracketed, e.g. ``info_extract: The cat [sat] on the mat .``; the model
output wraps every slot in a labelled bracket segment,
``[[The cat | subject 1] [sat | predicate 1] [on the mat | object 1] | tuple 1]``.
Decoding is total and tolerant: role keywords are matched case-insensitively,
spaces around ``|`` and between keyword and index are optional, and every
structural anomaly becomes a warning.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import ExtractionSet, Sentence, Triple, tuple_equal
from .triple_codec import ParseWarning, add_prefix

SLOT_ROLES = ("subject", "predicate", "object")
_ROLE_RE = re.compile(r"^\s*(subject|predicate|object|tuple)\s*(\d+)?\s*$", re.IGNORECASE)
_TRAILING_TUPLE_RE = re.compile(r"^\s*\|\s*tuple\s*(\d+)?\s*$", re.IGNORECASE)


@dataclass(frozen=True)
class VerbTaggedInput:
    sentence_id: str
    verb_index: int
    text: str


def make_verb_inputs(sentence: Sentence, verb_indices: Sequence[int]) -> list[VerbTaggedInput]:
    """One prefixed input per candidate verb, that verb alone bracketed;
    outputs follow verb position. An empty verb list yields no inputs (the
    caller counts such sentences)."""
    indices = sorted(set(verb_indices))
    for idx in indices:
        if not 0 <= idx < len(sentence):
            raise ValueError(
                f"verb index {idx} out of range for sentence {sentence.id!r} "
                f"of length {len(sentence)}"
            )
    inputs = []
    for idx in indices:
        words = sentence.texts
        words[idx] = f"[{words[idx]}]"
        inputs.append(VerbTaggedInput(sentence.id, idx, add_prefix(" ".join(words))))
    return inputs


def encode_tanl(extractions: ExtractionSet) -> str:
    parts = []
    for k, t in enumerate(extractions, start=1):
        subj = " ".join(t.subject)
        pred = " ".join(t.predicate)
        obj = " ".join(t.object)
        parts.append(
            f"[[{subj} | subject {k}] [{pred} | predicate {k}] "
            f"[{obj} | object {k}] | tuple {k}]"
        )
    return "".join(parts)


def _scan_bracket_groups(text: str) -> tuple[list[str], bool]:
    """Top-level balanced ``[ ... ]`` groups; returns (groups, truncated)."""
    groups: list[str] = []
    truncated = False
    i, n = 0, len(text)
    while i < n:
        if text[i] != "[":
            i += 1
            continue
        depth = 1
        j = i + 1
        while j < n and depth > 0:
            if text[j] == "[":
                depth += 1
            elif text[j] == "]":
                depth -= 1
            j += 1
        if depth > 0:
            truncated = True
            break
        groups.append(text[i + 1 : j - 1])
        i = j
    return groups, truncated


def _split_segments(content: str) -> tuple[list[str], str]:
    """Split group content into its depth-1 subgroups and the residual text
    around them (which carries the group's own ``| role k`` label)."""
    segments: list[str] = []
    residual: list[str] = []
    i, n = 0, len(content)
    while i < n:
        if content[i] != "[":
            residual.append(content[i])
            i += 1
            continue
        depth = 1
        j = i + 1
        while j < n and depth > 0:
            if content[j] == "[":
                depth += 1
            elif content[j] == "]":
                depth -= 1
            j += 1
        if depth > 0:
            # unclosed inner bracket: keep as residual text
            residual.append(content[i:])
            break
        segments.append(content[i + 1 : j - 1])
        i = j
    return segments, "".join(residual)


def _parse_slot_segment(segment: str) -> tuple[str, int | None, tuple[str, ...]] | None:
    """Parse ``content | role k``; returns (role, k, tokens) or None."""
    bar = segment.rfind("|")
    if bar < 0:
        return None
    m = _ROLE_RE.match(segment[bar + 1 :])
    if m is None:
        return None
    role = m.group(1).lower()
    k = int(m.group(2)) if m.group(2) else None
    return role, k, tuple(segment[:bar].split())


def _build_triple(
    slots: dict[str, tuple[str, ...]], warnings: list[ParseWarning], origin: str
) -> Triple | None:
    pred = slots.get("predicate", ())
    if not pred:
        warnings.append(ParseWarning("missing-predicate", f"group dropped: {origin}"))
        return None
    subj = slots.get("subject", ())
    obj = slots.get("object", ())
    missing = [r for r in ("subject", "object") if r not in slots]
    if missing:
        warnings.append(
            ParseWarning("missing-role", f"{'/'.join(missing)} absent in: {origin}")
        )
    return Triple(subj, pred, obj, partial=not subj or not obj)


def decode_tanl(text: str, sentence_id: str = "") -> tuple[ExtractionSet, list[ParseWarning]]:
    """Recover triples from augmented-language output; never raises."""
    warnings: list[ParseWarning] = []
    triples: list[Triple] = []
    groups, truncated = _scan_bracket_groups(text)
    if truncated:
        warnings.append(ParseWarning("unbalanced", "unclosed bracket group dropped"))
    if not groups and text.strip():
        warnings.append(ParseWarning("no-structure", f"nothing recovered from: {text[:60]!r}"))

    # slot segments appearing outside any tuple group accumulate here
    orphan: dict[str, tuple[str, ...]] = {}

    def flush_orphan() -> None:
        if orphan:
            warnings.append(
                ParseWarning("orphan-slots", "slot segments outside a tuple group")
            )
            t = _build_triple(orphan, warnings, "orphan slots")
            if t is not None:
                triples.append(t)
            orphan.clear()

    for group in groups:
        segments, residual = _split_segments(group)
        if not segments:
            parsed = _parse_slot_segment(group)
            if parsed is None:
                warnings.append(ParseWarning("unparseable", f"group dropped: [{group[:60]}]"))
                continue
            role, _, tokens = parsed
            if role == "tuple":
                warnings.append(ParseWarning("empty-tuple", f"tuple group has no slots: [{group}]"))
                continue
            if role in orphan:
                flush_orphan()
            orphan[role] = tokens
            continue

        # a group with subgroups is a tuple group; its residual should be
        # the trailing "| tuple k" label
        flush_orphan()
        if not _TRAILING_TUPLE_RE.match(residual):
            if residual.strip():
                warnings.append(
                    ParseWarning("bad-tuple-label", f"unexpected text {residual.strip()!r}")
                )
        by_index: dict[int | None, dict[str, tuple[str, ...]]] = {}
        order: list[int | None] = []
        for seg in segments:
            parsed = _parse_slot_segment(seg)
            if parsed is None:
                warnings.append(ParseWarning("unparseable", f"segment dropped: [{seg[:60]}]"))
                continue
            role, k, tokens = parsed
            if role == "tuple":
                warnings.append(ParseWarning("nested-tuple", f"ignored inner tuple label: [{seg[:60]}]"))
                continue
            if k not in by_index:
                by_index[k] = {}
                order.append(k)
            if role in by_index[k]:
                warnings.append(ParseWarning("duplicate-role", f"{role} repeated; first kept"))
                continue
            by_index[k][role] = tokens
        for k in order:
            t = _build_triple(by_index[k], warnings, f"[{group[:60]}]")
            if t is not None:
                triples.append(t)
    flush_orphan()
    return ExtractionSet(sentence_id, tuple(triples)), warnings


def merge_verb_outputs(per_verb: Iterable[ExtractionSet]) -> ExtractionSet:
    """Concatenate per-verb extraction sets in verb order and drop exact
    duplicates keeping the first occurrence."""
    sets = list(per_verb)
    if not sets:
        return ExtractionSet("", ())
    sentence_id = sets[0].sentence_id
    for s in sets[1:]:
        if s.sentence_id != sentence_id:
            raise ValueError(
                f"cannot merge outputs of different sentences: "
                f"{sentence_id!r} vs {s.sentence_id!r}"
            )
    merged: list[Triple] = []
    for s in sets:
        for t in s:
            if not any(tuple_equal(t, kept) for kept in merged):
                merged.append(t)
    return ExtractionSet(sentence_id, tuple(merged))
