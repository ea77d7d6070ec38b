"""Per-verb input generation and augmented-language round-trips."""

import random
import re

import pytest

from oietk.model import ExtractionSet, Sentence, Triple
from oietk.tanl import (
    VerbTaggedInput,
    decode_tanl,
    encode_tanl,
    make_verb_inputs,
    merge_verb_outputs,
)
from oietk.triple_codec import strip_prefix

from conftest import corrupt, random_extraction_set

CAT_SENTENCE = Sentence.from_texts("cat", ["The", "cat", "sat", "on", "the", "mat", "."])
ELECTIONS = Sentence.from_texts(
    "e1",
    [
        "The", "new", "elections", "are", "scheduled", "to", "take", "place",
        "on", "February", "2", "of", "next", "year", ".",
    ],
)


def normalize_ws(text: str) -> str:
    return re.sub(r"\s+", "", text)


def test_single_verb_input():
    inputs = make_verb_inputs(CAT_SENTENCE, [2])
    assert len(inputs) == 1
    assert inputs[0].text == "info_extract: The cat [sat] on the mat ."
    assert inputs[0].verb_index == 2


def test_two_verb_inputs_follow_position():
    inputs = make_verb_inputs(ELECTIONS, [6, 4])
    assert [v.verb_index for v in inputs] == [4, 6]
    assert "[scheduled]" in inputs[0].text
    assert "[take]" in inputs[1].text
    assert normalize_ws(strip_prefix(inputs[0].text)) == normalize_ws(
        "The new elections are [scheduled] to take place on February 2 of next year."
    )


def test_exactly_one_bracket_pair_per_input():
    for vin in make_verb_inputs(ELECTIONS, [4, 6]):
        assert vin.text.count("[") == 1
        assert vin.text.count("]") == 1


def test_empty_verb_list_yields_nothing():
    assert make_verb_inputs(CAT_SENTENCE, []) == []


def test_verb_index_out_of_range():
    with pytest.raises(ValueError):
        make_verb_inputs(CAT_SENTENCE, [99])


def test_stripping_brackets_and_prefix_recovers_sentence(rng):
    for _ in range(100):
        n = rng.randint(1, 12)
        s = Sentence.from_texts("t", [f"w{i}" for i in range(n)])
        verbs = sorted(rng.sample(range(n), rng.randint(1, min(3, n))))
        for vin in make_verb_inputs(s, verbs):
            body = strip_prefix(vin.text).replace("[", "").replace("]", "")
            assert body == s.text()


def test_encode_appendix_example():
    es = ExtractionSet(
        "cat", (Triple.from_texts("The cat", "sat", "on the mat"),)
    )
    assert encode_tanl(es) == (
        "[[The cat | subject 1] [sat | predicate 1] [on the mat | object 1] | tuple 1]"
    )


def test_encode_empty():
    assert encode_tanl(ExtractionSet("s", ())) == ""


def test_encode_numbers_tuples_sequentially():
    es = ExtractionSet(
        "e1",
        (
            Triple.from_texts("The new elections", "scheduled", "to take place on February 2"),
            Triple.from_texts(
                "The new elections", "scheduled", "to take place February 2 of next year"
            ),
        ),
    )
    text = encode_tanl(es)
    assert "| subject 2]" in text
    assert "| tuple 2]" in text
    assert text.index("| tuple 1]") < text.index("[[The new elections | subject 2]")


def test_decode_round_trip_appendix():
    es = ExtractionSet("cat", (Triple.from_texts("The cat", "sat", "on the mat"),))
    decoded, warnings = decode_tanl(encode_tanl(es), "cat")
    assert warnings == []
    assert decoded == es


def test_decode_missing_object_is_partial():
    decoded, warnings = decode_tanl("[[The cat | subject 1] [sat | predicate 1] | tuple 1]")
    assert len(decoded) == 1
    t = decoded.tuples[0]
    assert t.subject == ("The", "cat")
    assert t.predicate == ("sat",)
    assert t.object == ()
    assert t.partial
    assert len(warnings) == 1
    assert warnings[0].kind == "missing-role"


def test_decode_garbage():
    decoded, warnings = decode_tanl("garbage with no brackets")
    assert len(decoded) == 0
    assert len(warnings) == 1
    assert warnings[0].kind == "no-structure"


def test_decode_tolerates_tight_spacing():
    text = "[[The cat| subject 1] [sat| predicate 1] [on the mat| object 1]| tuple1]"
    decoded, warnings = decode_tanl(text)
    assert warnings == []
    assert decoded.tuples == (Triple.from_texts("The cat", "sat", "on the mat"),)


def test_decode_role_keywords_case_insensitive():
    text = "[[a | SUBJECT 1] [b | Predicate 1] [c | Object 1] | TUPLE 1]"
    decoded, warnings = decode_tanl(text)
    assert decoded.tuples == (Triple.from_texts("a", "b", "c"),)


def test_decode_missing_predicate_dropped():
    text = "[[a | subject 1] [c | object 1] | tuple 1]"
    decoded, warnings = decode_tanl(text)
    assert len(decoded) == 0
    assert any(w.kind == "missing-predicate" for w in warnings)


def test_round_trip_property(rng):
    for i in range(1000):
        es = random_extraction_set(rng, f"rt{i}")
        decoded, warnings = decode_tanl(encode_tanl(es), f"rt{i}")
        assert warnings == []
        assert decoded == es


def test_decode_total_on_corrupted_strings(rng):
    for i in range(1000):
        base = encode_tanl(random_extraction_set(rng))
        text = corrupt(rng, base) if i % 2 == 0 else corrupt(rng, corrupt(rng, base))
        decoded, _ = decode_tanl(text)
        for t in decoded:
            assert len(t.predicate) > 0


def test_merge_concatenates_and_dedups():
    a = Triple.from_texts("a", "b", "c")
    b = Triple.from_texts("d", "e", "f")
    s1 = ExtractionSet("s", (a,))
    s2 = ExtractionSet("s", (b,))
    assert merge_verb_outputs([s1, s2]).tuples == (a, b)
    assert merge_verb_outputs([s1, s1]).tuples == (a,)
    assert merge_verb_outputs([ExtractionSet("s", ()), s2]).tuples == (b,)


def test_merge_idempotent_and_order_stable(rng):
    for _ in range(50):
        sets = [random_extraction_set(rng, "m") for _ in range(3)]
        merged = merge_verb_outputs(sets)
        again = merge_verb_outputs([merged, merged])
        assert again == merged
        # associativity over concatenation order
        left = merge_verb_outputs([merge_verb_outputs(sets[:2]), sets[2]])
        right = merge_verb_outputs([sets[0], merge_verb_outputs(sets[1:])])
        assert left == right


def test_merge_rejects_mixed_sentence_ids():
    with pytest.raises(ValueError):
        merge_verb_outputs([ExtractionSet("a", ()), ExtractionSet("b", ())])
