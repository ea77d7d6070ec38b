"""Shared generators for property-style tests (seeded, deterministic)."""

import random

import pytest

from oietk.model import ExtractionSet, Triple

# token pool free of structural characters, so codec round-trips are exact
WORDS = [
    "cat", "sat", "mat", "dog", "ran", "the", "a", "on", "big", "red",
    "chairman", "role", "will", "government", "2009", "director", "new",
    "elections", "place", "February",
]


def random_triple(rng: random.Random) -> Triple:
    def slot(min_len: int) -> tuple:
        return tuple(rng.choice(WORDS) for _ in range(rng.randint(min_len, 4)))

    subject = slot(0)
    predicate = slot(1)
    obj = slot(0)
    return Triple(subject, predicate, obj, partial=not subject or not obj)


def random_extraction_set(rng: random.Random, sentence_id: str = "s") -> ExtractionSet:
    return ExtractionSet(
        sentence_id, tuple(random_triple(rng) for _ in range(rng.randint(0, 4)))
    )


def corrupt(rng: random.Random, text: str) -> str:
    """Random character-level edits, biased toward structural characters."""
    chars = list(text)
    alphabet = list("()[]|;; ()|ab1 ")
    for _ in range(rng.randint(1, 8)):
        op = rng.random()
        if op < 0.4 and chars:
            del chars[rng.randrange(len(chars))]
        elif op < 0.8:
            chars.insert(rng.randrange(len(chars) + 1), rng.choice(alphabet))
        elif chars:
            chars[rng.randrange(len(chars))] = rng.choice(alphabet)
    return "".join(chars)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240117)
