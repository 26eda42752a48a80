"""The stub model must match the primary package's local lexical scorer.

The primary implements the same documented formula independently; the
suite treats it as the oracle for the service-side implementation.
"""

import random

import pytest
from fastapi.testclient import TestClient

from docasd.scorer import lexical_similarity

from scorer_sidecar.app import create_app
from scorer_sidecar.lexical import stub_similarity
from scorer_sidecar.registry import build_registry

ALPHABET = "abcdefgh é你好"


def random_text(rng: random.Random) -> str:
    return "".join(rng.choice(ALPHABET) for _ in range(rng.randint(0, 20)))


def test_hand_computed_values():
    assert stub_similarity("night", "night") == 1.0
    assert stub_similarity("abcd", "cdab") == pytest.approx(2 / 3, abs=1e-12)
    assert stub_similarity("a", "b") == 0.0
    assert stub_similarity("anything", "") == 0.0


def test_matches_primary_on_random_pairs():
    rng = random.Random(424242)
    for _ in range(1000):
        src = random_text(rng)
        mt = random_text(rng)
        assert stub_similarity(src, mt) == pytest.approx(
            lexical_similarity(src, mt), abs=1e-9), (src, mt)


def test_service_scores_match_primary_end_to_end():
    client = TestClient(create_app(build_registry("stub"), max_batch=128))
    rng = random.Random(777)
    items = [{"src": random_text(rng) or "x", "mt": random_text(rng)}
             for _ in range(100)]
    response = client.post("/v1/score", json={"metric": "stub-lexical",
                                              "items": items})
    assert response.status_code == 200
    for item, value in zip(items, response.json()["scores"]):
        assert value == pytest.approx(
            lexical_similarity(item["src"], item["mt"]), abs=1e-9)
