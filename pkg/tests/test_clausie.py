"""Subsumption filtering and capture ingestion."""

import io
import random

import pytest

from oietk.clausie import (
    FormatError,
    IngestReport,
    RawRecord,
    filter_extractions,
    ingest_corpus,
    is_subsumed,
    parse_clausie_text,
    parse_triple_line,
)
from oietk.model import ExtractionSet, Triple

from conftest import random_extraction_set

AKERSON_TRIPLES = [
    Triple.from_texts("She", "replaces", "Daniel Akerson"),
    Triple.from_texts("the company", "has", "bankruptcy"),
    Triple.from_texts(
        "Daniel Akerson",
        "was appointed",
        "by the government as both chief executive and chairman in 2009",
    ),
    Triple.from_texts(
        "Daniel Akerson",
        "was appointed",
        "by the government as both chief executive and chairman in 2009 "
        "during the company 's bankruptcy",
    ),
]


def test_extended_object_subsumes_shorter():
    assert is_subsumed(AKERSON_TRIPLES[2], AKERSON_TRIPLES[3])
    assert not is_subsumed(AKERSON_TRIPLES[3], AKERSON_TRIPLES[2])


def test_equal_triples_not_subsumed():
    t = Triple.from_texts("She", "replaces", "Daniel Akerson")
    assert not is_subsumed(t, t)


def test_non_subsequence_object():
    a = Triple.from_texts("cat", "sat", "mat")
    b = Triple.from_texts("cat", "sat", "rug")
    assert not is_subsumed(a, b)
    # scattered (non-contiguous) containment does not subsume
    c = Triple.from_texts("cat", "sat", "the mat")
    d = Triple.from_texts("cat", "sat", "the red mat")
    assert not is_subsumed(c, d)
    assert is_subsumed(Triple.from_texts("cat", "sat", "red mat"), d)


def test_case_fold_flag():
    a = Triple.from_texts("CAT", "sat", "mat")
    b = Triple.from_texts("cat", "sat", "the mat")
    assert not is_subsumed(a, b)
    assert is_subsumed(a, b, case_fold=True)


def test_subsumption_is_strict_partial_order(rng):
    pool = [t for _ in range(30) for t in random_extraction_set(rng).tuples]
    for a in pool:
        assert not is_subsumed(a, a)
    for a in pool[:12]:
        for b in pool[:12]:
            if is_subsumed(a, b):
                assert not is_subsumed(b, a)
            for c in pool[:12]:
                if is_subsumed(a, b) and is_subsumed(b, c):
                    assert is_subsumed(a, c)


def test_filter_removes_appendix_case():
    es = ExtractionSet("akerson", tuple(AKERSON_TRIPLES))
    out = filter_extractions(es)
    assert len(out) == 3
    assert AKERSON_TRIPLES[2] not in out.tuples
    assert out.tuples == (AKERSON_TRIPLES[0], AKERSON_TRIPLES[1], AKERSON_TRIPLES[3])


def test_filter_keeps_unrelated_and_collapses_duplicates():
    a = Triple.from_texts("a", "b", "c")
    b = Triple.from_texts("d", "e", "f")
    assert filter_extractions(ExtractionSet("s", (a, b))).tuples == (a, b)
    assert filter_extractions(ExtractionSet("s", (a, a, b))).tuples == (a, b)


def test_filter_idempotent_and_monotone(rng):
    for _ in range(100):
        es = random_extraction_set(rng)
        once = filter_extractions(es)
        twice = filter_extractions(once)
        assert once == twice
        assert len(once) <= len(es)
        for t in once.tuples:
            assert t in es.tuples


def test_parse_triple_line():
    t = parse_triple_line("(She; replaces; Daniel Akerson)")
    assert t == Triple.from_texts("She", "replaces", "Daniel Akerson")
    with pytest.raises(FormatError):
        parse_triple_line("She replaces Daniel")
    with pytest.raises(FormatError):
        parse_triple_line("(She; replaces)")
    # extra semicolons go into the object
    t = parse_triple_line("(a; b; c; d)")
    assert t.object == ("c", "d")


def test_parse_clausie_text_records():
    text = (
        "s1\tShe replaces Daniel Akerson\n"
        "(She; replaces; Daniel Akerson)\n"
        "(the company; has; bankruptcy)\n"
        "s2\tBroken sentence\n"
        "!NullPointerException\n"
        "s3\tAnother one\n"
        "(a; b; c)\n"
        "(not a triple\n"
    )
    records = list(parse_clausie_text(io.StringIO(text)))
    assert len(records) == 3
    assert len(records[0].triples) == 2
    assert records[1].failed
    assert records[2].id == "s3"
    assert records[2].format_errors == 1


def test_ingest_counts_failures():
    records = [RawRecord(f"r{i}") for i in range(98)] + [
        RawRecord("f1", failed=True),
        RawRecord("f2", failed=True),
    ]
    dataset, report = ingest_corpus(records)
    assert len(dataset) == 98
    assert report.sentences_failed == 2
    assert report.drop_ratio == pytest.approx(0.02)


def test_ingest_empty():
    dataset, report = ingest_corpus([])
    assert dataset == []
    assert report.sentences_in == 0
    assert report.drop_ratio == 0.0


def test_malformed_triple_counted_rest_kept():
    text = "s1\tx\n(a; b; c)\n(broken\n(d; e; f)\n"
    records = list(parse_clausie_text(io.StringIO(text)))
    assert len(records) == 1
    assert len(records[0].triples) == 2
    assert records[0].format_errors == 1
    _, report = ingest_corpus(records)
    assert report.format_errors == 1
