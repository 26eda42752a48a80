"""Shared test helpers: synthetic parallel documents and golden fixtures."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from docasd.fixtures import fixture_path

WORDS = (
    "river mountain harvest window lantern garden winter message council "
    "journey teacher market bridge evening thunder library pocket signal "
    "orchard captain violin shadow meadow copper barrel pencil dragon "
    "harbor temple furnace blanket mirror compass jungle saddle"
).split()


def make_sentences(rng: random.Random, count: int) -> list[str]:
    """Distinct word-salad sentences; identical text scores 1.0 under the
    lexical metric while distinct sentences stay well below it."""
    seen: set[str] = set()
    out: list[str] = []
    while len(out) < count:
        n_words = rng.randint(5, 9)
        words = [rng.choice(WORDS) for _ in range(n_words)]
        sentence = (" ".join(words)).capitalize() + "."
        if sentence not in seen:
            seen.add(sentence)
            out.append(sentence)
    return out


def join_doc(sentences: list[str]) -> str:
    return " ".join(sentences)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240817)


@pytest.fixture
def golden_source() -> str:
    return fixture_path("golden_pair_source.txt").read_text(encoding="utf-8")


@pytest.fixture
def golden_target() -> str:
    return fixture_path("golden_pair_target.txt").read_text(encoding="utf-8")


@pytest.fixture
def golden_matrix_path() -> Path:
    return fixture_path("golden_pair_matrix.json")
