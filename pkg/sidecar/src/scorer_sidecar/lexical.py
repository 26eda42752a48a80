"""Service-side deterministic stand-in scorer.

Cosine similarity of character-bigram counts over NFC-lowercased text,
bounded in [0, 1], 0.0 when either side has no bigrams.  Used by the stub
model mode so the service can run and be tested without any weights.
"""

from __future__ import annotations

import math
import unicodedata


def bigram_counts(text: str) -> dict[str, int]:
    normalized = unicodedata.normalize("NFC", text).lower()
    counts: dict[str, int] = {}
    for i in range(len(normalized) - 1):
        gram = normalized[i : i + 2]
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def stub_similarity(src: str, mt: str) -> float:
    a = bigram_counts(src)
    b = bigram_counts(mt)
    if not a or not b:
        return 0.0
    dot = sum(count * b.get(gram, 0) for gram, count in a.items())
    if dot == 0:
        return 0.0
    norm_sq = sum(v * v for v in a.values()) * sum(v * v for v in b.values())
    return min(1.0, dot / math.sqrt(norm_sq))
