"""Word-level linguistic tag layers, their TSV interchange format, and
projection of word tags onto subword token streams.

Three layers are carried per sentence: part-of-speech (one UPenn tag per
word), syntactic dependencies (one head/relation per word, exactly one
root), and semantic dependencies (zero or more head/relation pairs per
word; untagged words carry the blank ``_``). Subword streams additionally
use three special tags: task-prefix subwords are tagged ``<pad>``, unknown
subwords ``<unk>`` and the end-of-sequence subword ``</s>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Sequence, Union

from .model import Sentence

KIND_POS = "pos"
KIND_SYNDP = "syndp"
KIND_SEMDP = "semdp"
KINDS = (KIND_POS, KIND_SYNDP, KIND_SEMDP)

PAD_TAG = "<pad>"
UNK_TAG = "<unk>"
EOS_TAG = "</s>"
SPECIAL_TAGS = (PAD_TAG, UNK_TAG, EOS_TAG)

# UPenn TreeBank inventory (word classes plus punctuation tags)
POS_TAGSET = frozenset({
    "$", "''", "(", ")", ",", "--", ".", ":", "``",
    "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD",
    "NN", "NNP", "NNPS", "NNS", "PDT", "POS", "PRP", "PRP$",
    "RB", "RBR", "RBS", "RP", "SYM", "TO", "UH",
    "VB", "VBD", "VBG", "VBN", "VBP", "VBZ",
    "WDT", "WP", "WP$", "WRB",
})

# Universal Dependencies relation inventory (base relations; subtypes are
# written base:subtype and validated against the base)
UD_RELATIONS = frozenset({
    "acl", "advcl", "advmod", "amod", "appos", "aux", "case", "cc", "ccomp",
    "clf", "compound", "conj", "cop", "csubj", "dep", "det", "discourse",
    "dislocated", "expl", "fixed", "flat", "goeswith", "iobj", "list",
    "mark", "nmod", "nsubj", "nummod", "obj", "obl", "orphan", "parataxis",
    "punct", "reparandum", "root", "vocative", "xcomp",
})

# DM semantic-dependency inventory; "_" is the blank tag of untagged words
SEMDP_RELATIONS = (
    "ARG1", "ARG2", "compound", "BV", "root", "poss", "loc", "-and-c",
    "ARG3", "times", "mwe", "appos", "conj", "neg", "subord", "-or-c",
    "-but-c", "_",
)
SEMDP_BLANK = "_"

PREFIX_SUBWORD = "prefix"
SPECIAL_SUBWORD = "special"

WordRef = Union[int, str]  # word index, "prefix" or "special"


class AlignmentMismatch(ValueError):
    """A subword points at a word index the sentence does not have."""


@dataclass(frozen=True)
class DepEdge:
    head: int  # 1-based word index, 0 for root
    relation: str


@dataclass(frozen=True)
class LinguisticLayer:
    """One tag layer, parallel to the sentence words.

    entries per kind: pos -> str, syndp -> DepEdge,
    semdp -> tuple[DepEdge, ...] (may be empty).
    """

    kind: str
    entries: tuple

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown layer kind {self.kind!r}")
        object.__setattr__(self, "entries", tuple(self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def tag_labels(self) -> list[str]:
        """The per-word tag label consumed by embedding lookup: the PoS tag,
        the syntactic relation label (never the head), or the first semantic
        pair's relation (``_`` when untagged)."""
        if self.kind == KIND_POS:
            return list(self.entries)
        if self.kind == KIND_SYNDP:
            return [e.relation for e in self.entries]
        return [select_semdp_tag(pairs) for pairs in self.entries]

    def validate(self, n_words: int) -> list[tuple[int | None, str]]:
        """Layer-invariant violations as (word_index, message); word_index is
        None for whole-layer problems."""
        errors: list[tuple[int | None, str]] = []
        if len(self.entries) != n_words:
            errors.append(
                (None, f"{self.kind} layer has {len(self.entries)} entries for {n_words} words")
            )
            return errors
        if self.kind == KIND_POS:
            for i, tag in enumerate(self.entries):
                if tag not in POS_TAGSET:
                    errors.append((i, f"PoS tag {tag!r} not in the UPenn inventory"))
        elif self.kind == KIND_SYNDP:
            roots = 0
            for i, edge in enumerate(self.entries):
                if not 0 <= edge.head <= n_words:
                    errors.append((i, f"head {edge.head} out of range"))
                base = edge.relation.split(":", 1)[0]
                if base not in UD_RELATIONS:
                    errors.append((i, f"relation {edge.relation!r} not in the UD inventory"))
                if (edge.head == 0) != (edge.relation == "root"):
                    errors.append(
                        (i, f"head 0 and relation 'root' must coincide "
                            f"(got head {edge.head}, {edge.relation!r})")
                    )
                if edge.head == 0:
                    roots += 1
            if roots != 1:
                errors.append((None, f"syndp layer has {roots} roots, expected exactly 1"))
        else:
            for i, pairs in enumerate(self.entries):
                for edge in pairs:
                    if not 0 <= edge.head <= n_words:
                        errors.append((i, f"semdp head {edge.head} out of range"))
                    if edge.relation == SEMDP_BLANK or edge.relation not in SEMDP_RELATIONS:
                        errors.append(
                            (i, f"semdp relation {edge.relation!r} not in the DM inventory")
                        )
        return errors


@dataclass(frozen=True)
class TaggedSentence:
    sentence: Sentence
    layers: dict[str, LinguisticLayer] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for kind, layer in self.layers.items():
            if kind != layer.kind:
                raise ValueError(f"layer keyed {kind!r} has kind {layer.kind!r}")
            if len(layer) != len(self.sentence):
                raise ValueError(
                    f"sentence {self.sentence.id!r}: {kind} layer is not length-parallel"
                )

    def validate(self) -> list[tuple[int | None, str]]:
        errors: list[tuple[int | None, str]] = []
        for kind in KINDS:
            if kind in self.layers:
                errors.extend(self.layers[kind].validate(len(self.sentence)))
        return errors


def select_semdp_tag(pairs: Sequence[DepEdge]) -> str:
    """First pair's relation, or the blank tag for untagged words."""
    if pairs:
        return pairs[0].relation
    return SEMDP_BLANK


@dataclass(frozen=True)
class SubwordAlignment:
    """Mapping from a subword stream back to source words. Entries of
    word_of_subword are 0-based word indices, ``"prefix"`` for task-prefix
    subwords, or ``"special"`` for tokenizer specials (pad/unk/eos)."""

    subword_texts: tuple[str, ...]
    word_of_subword: tuple[WordRef, ...]

    def __post_init__(self) -> None:
        if len(self.subword_texts) != len(self.word_of_subword):
            raise ValueError("subword_texts and word_of_subword are not parallel")
        last = -1
        for ref in self.word_of_subword:
            if isinstance(ref, int):
                if ref < last:
                    raise ValueError("word indices must be non-decreasing across subwords")
                last = ref
            elif ref not in (PREFIX_SUBWORD, SPECIAL_SUBWORD):
                raise ValueError(f"bad word reference {ref!r}")

    def __len__(self) -> int:
        return len(self.subword_texts)

    def to_dict(self) -> dict:
        return {
            "subwords": list(self.subword_texts),
            "words": list(self.word_of_subword),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SubwordAlignment":
        return cls(tuple(d["subwords"]), tuple(d["words"]))


def align_tags(
    tagged: TaggedSentence,
    alignment: SubwordAlignment,
    kind: str,
    *,
    first_subword_only: bool = False,
) -> list[str]:
    """Project one word-level layer onto the subword stream.

    Prefix subwords get ``<pad>``, the eos special gets ``</s>``, other
    specials get ``<unk>``; every remaining subword inherits its word's tag,
    repeated across all subwords of that word (or only on the first subword
    with continuations padded, when first_subword_only is set).
    """
    if kind not in tagged.layers:
        raise KeyError(f"sentence {tagged.sentence.id!r} has no {kind!r} layer")
    labels = tagged.layers[kind].tag_labels()
    out: list[str] = []
    prev_word: int | None = None
    for text, ref in zip(alignment.subword_texts, alignment.word_of_subword):
        if ref == PREFIX_SUBWORD:
            out.append(PAD_TAG)
        elif ref == SPECIAL_SUBWORD:
            if text == EOS_TAG:
                out.append(EOS_TAG)
            elif text == PAD_TAG:
                out.append(PAD_TAG)
            else:
                out.append(UNK_TAG)
        else:
            if not 0 <= ref < len(labels):
                raise AlignmentMismatch(
                    f"subword {text!r} points at word {ref}, sentence "
                    f"{tagged.sentence.id!r} has {len(labels)} words"
                )
            if first_subword_only and ref == prev_word:
                out.append(PAD_TAG)
            else:
                out.append(labels[ref])
            prev_word = ref
    return out


def whitespace_alignment(sentence: Sentence, *, prefix_subwords: Sequence[str] = ("info", "_extract", ":"), eos: bool = True) -> SubwordAlignment:
    """Degenerate one-subword-per-word alignment with the task prefix in
    front; useful for smoke tests and for tokenizers applied externally."""
    texts = list(prefix_subwords)
    refs: list[WordRef] = [PREFIX_SUBWORD] * len(texts)
    for tok in sentence.tokens:
        texts.append(tok.text)
        refs.append(tok.index)
    if eos:
        texts.append(EOS_TAG)
        refs.append(SPECIAL_SUBWORD)
    return SubwordAlignment(tuple(texts), tuple(refs))


# ---------------------------------------------------------------------------
# TSV interchange format
#
# Five tab-separated columns per word: word, PoS, SynDP head, SynDP
# relation, SemDP pair list ("head:rel|head:rel" or "_"). Blank line between
# sentences; "#" starts a comment; "# id = X" names the next sentence and
# "# layers = pos,syndp" declares which columns are populated.
# ---------------------------------------------------------------------------


def _format_semdp(pairs: Sequence[DepEdge]) -> str:
    if not pairs:
        return SEMDP_BLANK
    return "|".join(f"{e.head}:{e.relation}" for e in pairs)


def _parse_semdp(cell: str, lineno: int) -> tuple[DepEdge, ...]:
    cell = cell.strip()
    if cell == SEMDP_BLANK or not cell:
        return ()
    pairs = []
    for part in cell.split("|"):
        head_s, sep, rel = part.partition(":")
        if not sep:
            raise ValueError(f"line {lineno}: bad semdp pair {part!r}")
        try:
            head = int(head_s)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad semdp head {head_s!r}") from exc
        pairs.append(DepEdge(head, rel.strip()))
    return tuple(pairs)


def write_interchange(sentences: Iterable[TaggedSentence], fh: IO[str]) -> int:
    n = 0
    first = True
    for ts in sentences:
        if first:
            kinds = [k for k in KINDS if k in ts.layers]
            fh.write(f"# layers = {','.join(kinds)}\n")
            first = False
        else:
            fh.write("\n")
        fh.write(f"# id = {ts.sentence.id}\n")
        pos = ts.layers.get(KIND_POS)
        syn = ts.layers.get(KIND_SYNDP)
        sem = ts.layers.get(KIND_SEMDP)
        for i, tok in enumerate(ts.sentence.tokens):
            cols = [
                tok.text,
                pos.entries[i] if pos else "_",
                str(syn.entries[i].head) if syn else "_",
                syn.entries[i].relation if syn else "_",
                _format_semdp(sem.entries[i]) if sem else "_",
            ]
            fh.write("\t".join(cols) + "\n")
        n += 1
    return n


def _read_sentences(
    fh: IO[str] | Iterable[str],
) -> Iterator[tuple[TaggedSentence, list[int]]]:
    """Parse the TSV interchange, yielding each sentence with the input line
    number of every word row; raises ValueError with line numbers on
    structural problems (layer-invariant violations are reported by
    validate(), not here)."""
    declared: list[str] | None = None
    counter = 0
    pending_id: str | None = None
    rows: list[tuple[int, list[str]]] = []

    def flush() -> tuple[TaggedSentence, list[int]] | None:
        nonlocal counter, pending_id, rows
        if not rows:
            pending_id = None
            return None
        sent_id = pending_id if pending_id is not None else f"s{counter}"
        counter += 1
        sentence = Sentence.from_texts(sent_id, [cols[0] for _, cols in rows])
        have_pos = any(cols[1] != "_" for _, cols in rows)
        have_syn = any(cols[2] != "_" or cols[3] != "_" for _, cols in rows)
        have_sem = any(cols[4] != "_" for _, cols in rows)
        if declared is not None:
            have_pos = KIND_POS in declared
            have_syn = KIND_SYNDP in declared
            have_sem = KIND_SEMDP in declared
        layers: dict[str, LinguisticLayer] = {}
        if have_pos:
            layers[KIND_POS] = LinguisticLayer(
                KIND_POS, tuple(cols[1] for _, cols in rows)
            )
        if have_syn:
            edges = []
            for lineno, cols in rows:
                try:
                    head = int(cols[2])
                except ValueError as exc:
                    raise ValueError(f"line {lineno}: bad syndp head {cols[2]!r}") from exc
                edges.append(DepEdge(head, cols[3]))
            layers[KIND_SYNDP] = LinguisticLayer(KIND_SYNDP, tuple(edges))
        if have_sem:
            layers[KIND_SEMDP] = LinguisticLayer(
                KIND_SEMDP,
                tuple(_parse_semdp(cols[4], lineno) for lineno, cols in rows),
            )
        linenos = [lineno for lineno, _ in rows]
        rows, pending_id = [], None
        return TaggedSentence(sentence, layers), linenos

    for lineno, line in enumerate(fh, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            item = flush()
            if item is not None:
                yield item
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            key, _, value = body.partition("=")
            key = key.strip()
            if key == "id":
                pending_id = value.strip()
            elif key == "layers":
                declared = [k.strip() for k in value.split(",") if k.strip()]
            continue
        cols = line.split("\t")
        if len(cols) < 5:
            raise ValueError(f"line {lineno}: expected 5 tab-separated columns, got {len(cols)}")
        rows.append((lineno, cols))
    item = flush()
    if item is not None:
        yield item


def read_interchange(fh: IO[str] | Iterable[str]) -> Iterator[TaggedSentence]:
    for ts, _ in _read_sentences(fh):
        yield ts


@dataclass
class ValidationIssue:
    sentence_id: str
    lineno: int | None
    message: str

    def __str__(self) -> str:
        where = f"line {self.lineno}" if self.lineno is not None else "file"
        return f"{where} (sentence {self.sentence_id or '?'}): {self.message}"


def validate_interchange(
    fh: IO[str] | Iterable[str],
) -> tuple[list[TaggedSentence], list[ValidationIssue]]:
    """Read and validate a whole interchange file; returns the parsed
    sentences plus every violation found, with input line numbers."""
    sentences: list[TaggedSentence] = []
    issues: list[ValidationIssue] = []
    try:
        for ts, linenos in _read_sentences(fh):
            sentences.append(ts)
            for word_index, msg in ts.validate():
                lineno = linenos[word_index] if word_index is not None else linenos[0]
                issues.append(ValidationIssue(ts.sentence.id, lineno, msg))
    except ValueError as exc:
        issues.append(ValidationIssue("", None, str(exc)))
    return sentences, issues


def distinct_tags(sentences: Iterable[TaggedSentence], kind: str) -> set[str]:
    """Distinct embedding-level tag labels used by a corpus for one layer."""
    seen: set[str] = set()
    for ts in sentences:
        if kind in ts.layers:
            seen.update(ts.layers[kind].tag_labels())
    return seen


def inventory_size(kind: str) -> int:
    """Size of the word-level tag inventory for a layer (specials excluded)."""
    if kind == KIND_POS:
        return len(POS_TAGSET)
    if kind == KIND_SYNDP:
        return len(UD_RELATIONS)
    if kind == KIND_SEMDP:
        return len(SEMDP_RELATIONS)
    raise ValueError(f"unknown layer kind {kind!r}")


def full_inventory(kind: str) -> list[str]:
    """Layer inventory plus the three special tags, as embedding-table keys."""
    if kind == KIND_POS:
        base = sorted(POS_TAGSET)
    elif kind == KIND_SYNDP:
        base = sorted(UD_RELATIONS)
    elif kind == KIND_SEMDP:
        base = list(SEMDP_RELATIONS)
    else:
        raise ValueError(f"unknown layer kind {kind!r}")
    return base + list(SPECIAL_TAGS)
