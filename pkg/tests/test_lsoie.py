"""BIO-to-triple conversion rules and the tabular corpus reader."""

import io
import random

import pytest

from oietk.lsoie import (
    BioExample,
    BioRow,
    ConversionReport,
    MalformedBio,
    MissingPredicate,
    bio_example_to_extractions,
    bio_row_to_tuple,
    convert_corpus,
    parse_lsoie,
)
from oietk.model import Sentence, Triple


def sent(*words):
    return Sentence.from_texts("t", words)


def test_akerson_grouping():
    s = sent("Akerson", "will", "relinquish", "his", "chairman", "role")
    row = BioRow(("A0-B", "P-B", "P-I", "A1-B", "A1-I", "A1-I"))
    triple, repaired = bio_row_to_tuple(s, row)
    assert triple == Triple(
        ("Akerson",), ("will", "relinquish"), ("his", "chairman", "role")
    )
    assert not repaired


def test_cat_sat_mat():
    s = sent("cat", "sat", "mat")
    triple, _ = bio_row_to_tuple(s, BioRow(("A0-B", "P-B", "A1-B")))
    assert triple == Triple(("cat",), ("sat",), ("mat",))


def test_missing_predicate():
    s = sent("cat", "sat")
    with pytest.raises(MissingPredicate):
        bio_row_to_tuple(s, BioRow(("A0-B", "O")))


def test_higher_roles_fold_into_object_ascending():
    s = sent("a", "b", "c", "d", "e", "f")
    # A3 span appears before A2 in the sentence; object order is still A1, A2, A3
    row = BioRow(("A0-B", "P-B", "A1-B", "A3-B", "A2-B", "A2-I"))
    triple, _ = bio_row_to_tuple(s, row)
    assert triple.object == ("c", "e", "f", "d")


def test_slot_order_is_sentence_order():
    s = sent("x", "p", "y", "z")
    row = BioRow(("A1-B", "P-B", "A1-I", "A1-I"))
    triple, _ = bio_row_to_tuple(s, row)
    assert triple.object == ("x", "y", "z")
    assert triple.partial  # no A0


def test_unknown_tag_always_malformed():
    s = sent("a", "b")
    with pytest.raises(MalformedBio):
        bio_row_to_tuple(s, BioRow(("A6-B", "P-B")))
    with pytest.raises(MalformedBio):
        bio_row_to_tuple(s, BioRow(("bogus", "P-B")), on_malformed="repair")


def test_stray_i_tag_repair_vs_strict():
    s = sent("a", "b", "c")
    row = BioRow(("A0-I", "P-B", "A1-B"))
    triple, repaired = bio_row_to_tuple(s, row, on_malformed="repair")
    assert repaired
    assert triple.subject == ("a",)
    with pytest.raises(MalformedBio):
        bio_row_to_tuple(s, row, on_malformed="strict")
    # role switch without B is also a continuity break
    row2 = BioRow(("A0-B", "A1-I", "P-B"))
    with pytest.raises(MalformedBio):
        bio_row_to_tuple(s, row2, on_malformed="strict")


def test_partial_when_arguments_missing():
    s = sent("p", "q")
    triple, _ = bio_row_to_tuple(s, BioRow(("P-B", "P-I")))
    assert triple.partial
    assert triple.subject == () and triple.object == ()


def test_example_conversion_aggregates_errors():
    s = sent("cat", "sat", "mat")
    example = BioExample(
        s,
        (
            BioRow(("A0-B", "P-B", "A1-B")),
            BioRow(("A0-B", "O", "O")),  # no predicate
            BioRow(("A0-B", "P-B", "A1-B")),
        ),
    )
    extractions, report = bio_example_to_extractions(example)
    assert len(extractions) == 2
    assert report.rows_dropped == 1
    assert report.dropped_missing_predicate == 1
    assert report.rows_converted == 2


def test_empty_example():
    example = BioExample(sent("cat"), ())
    extractions, report = bio_example_to_extractions(example)
    assert len(extractions) == 0
    assert report.rows_total == 0


def test_conversion_never_invents_tokens(rng):
    words = ["w%d" % i for i in range(10)]
    for _ in range(200):
        n = rng.randint(1, 10)
        s = Sentence.from_texts("t", words[:n])
        tags = []
        for _ in range(n):
            tags.append(
                rng.choice(["O", "A0-B", "A0-I", "A1-B", "A1-I", "A2-B", "P-B", "P-I"])
            )
        try:
            triple, _ = bio_row_to_tuple(s, BioRow(tuple(tags)))
        except MissingPredicate:
            continue
        source = set(s.texts)
        for slot in triple.slots():
            assert set(slot) <= source


def test_parse_lsoie_layout():
    text = (
        "# id = w1\n"
        "cat\tA0-B\tO\n"
        "sat\tP-B\tP-B\n"
        "mat\tA1-B\tA1-B\n"
        "\n"
        "dog\tA0-B\n"
        "ran\tP-B\n"
    )
    examples = list(parse_lsoie(io.StringIO(text)))
    assert len(examples) == 2
    assert examples[0].sentence.id == "w1"
    assert len(examples[0].rows) == 2
    assert examples[1].sentence.id == "s1"
    assert examples[1].rows[0].tags == ("A0-B", "P-B")


def test_parse_lsoie_ragged_columns_rejected():
    text = "cat\tA0-B\tO\nsat\tP-B\n"
    with pytest.raises(ValueError, match="line 2"):
        list(parse_lsoie(io.StringIO(text)))


def test_convert_corpus_deterministic(rng):
    lines = []
    for i in range(50):
        lines.append(f"# id = s{i}\n")
        n = rng.randint(1, 8)
        for j in range(n):
            tag = "P-B" if j == 0 else rng.choice(["A0-B", "A1-B", "O"])
            lines.append(f"tok{j}\t{tag}\n")
        lines.append("\n")
    text = "".join(lines)
    first = convert_corpus(parse_lsoie(io.StringIO(text)))
    second = convert_corpus(parse_lsoie(io.StringIO(text)))
    assert first[0] == second[0]
    assert first[1].to_dict() == second[1].to_dict()
