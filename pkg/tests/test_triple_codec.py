"""Sequential triple string encoding/decoding."""

import random

from oietk.model import ExtractionSet, Triple
from oietk.triple_codec import (
    TASK_PREFIX,
    add_prefix,
    decode_triples,
    encode_triples,
    strip_prefix,
)

from conftest import corrupt, random_extraction_set


def test_encode_single():
    es = ExtractionSet("s", (Triple.from_texts("cat", "sat", "mat"),))
    assert encode_triples(es) == "(cat ; sat ; mat)"


def test_encode_multiple_matches_table_style():
    es = ExtractionSet(
        "s",
        (
            Triple.from_texts("Akerson", "will relinquish", "his chairman role"),
            Triple.from_texts("current director Theodore Solso", "will replaced", "Akerson"),
        ),
    )
    assert encode_triples(es) == (
        "(Akerson ; will relinquish ; his chairman role) "
        "(current director Theodore Solso ; will replaced ; Akerson)"
    )


def test_encode_empty():
    assert encode_triples(ExtractionSet("s", ())) == ""


def test_decode_clean_round_trip():
    es, warnings = decode_triples("(cat ; sat ; mat)")
    assert warnings == []
    assert es.tuples == (Triple.from_texts("cat", "sat", "mat"),)


def test_decode_unbalanced_group_dropped():
    es, warnings = decode_triples("(cat ; sat ; mat) (dog ; ran")
    assert es.tuples == (Triple.from_texts("cat", "sat", "mat"),)
    assert len(warnings) == 1
    assert warnings[0].kind == "unbalanced"


def test_decode_extra_semicolons_merge_into_object():
    es, warnings = decode_triples("(a ; b ; c ; d)")
    assert es.tuples == (Triple(("a",), ("b",), ("c", "d")),)
    assert len(warnings) == 1
    assert warnings[0].kind == "extra-semicolons"


def test_decode_one_semicolon_gives_partial():
    es, warnings = decode_triples("(cat ; sat)")
    assert len(es) == 1
    assert es.tuples[0] == Triple(("cat",), ("sat",), (), partial=True)
    assert warnings[0].kind == "missing-object"


def test_decode_no_semicolons_drops_fragment():
    es, warnings = decode_triples("(just some words)")
    assert len(es) == 0
    assert warnings[0].kind == "no-semicolons"


def test_decode_empty_predicate_dropped():
    es, warnings = decode_triples("(a ;  ; c)")
    assert len(es) == 0
    assert any(w.kind == "empty-predicate" for w in warnings)


def test_decode_whitespace_around_semicolons_optional():
    es, warnings = decode_triples("(cat;sat;mat)")
    assert warnings == []
    assert es.tuples == (Triple.from_texts("cat", "sat", "mat"),)


def test_round_trip_property(rng):
    for i in range(1000):
        es = random_extraction_set(rng, f"rt{i}")
        decoded, warnings = decode_triples(encode_triples(es), f"rt{i}")
        assert warnings == []
        assert decoded == es


def test_decode_total_on_corrupted_strings(rng):
    for i in range(1000):
        base = encode_triples(random_extraction_set(rng))
        text = corrupt(rng, base) if i % 2 == 0 else corrupt(rng, corrupt(rng, base))
        decoded, _ = decode_triples(text)
        for t in decoded:
            assert len(t.predicate) > 0


def test_prefix_helpers():
    assert add_prefix("The cat sat") == "info_extract: The cat sat"
    assert strip_prefix("info_extract: The cat sat") == "The cat sat"
    assert strip_prefix("no prefix here") == "no prefix here"
    assert TASK_PREFIX == "info_extract: "
