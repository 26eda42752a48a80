"""Multi-granularity sliding-chunk evaluation of an aligned pair.

Every window of k consecutive aligned entries (stride 1, so m-k+1 windows)
is scored as one unit; per-k means are averaged into the final document
score.  Small k exposes omissions sharply; larger k re-merges adjacent
source sentences so that many-to-one translations are matched again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .alignment import AlignedPair
from .config import RunConfig
from .errors import InvalidInput, MetricContractError, WindowTooLarge
from .scorer import MetricId, ScoreItem, score_batch

DEFAULT_KS = (1, 2, 3, 4)


@dataclass(frozen=True)
class ChunkUnit:
    """One scoring unit: k consecutive aligned entries concatenated per side."""

    k: int
    start: int
    src_text: str
    mt_text: str
    ref_text: str | None = None


@dataclass(frozen=True)
class ChunkScoreSet:
    """All unit scores for one chunk size, plus their mean."""

    k: int
    unit_scores: tuple[float, ...]
    mean: float


@dataclass(frozen=True)
class ASDResult:
    """Document-level result: per-k means and their unweighted average."""

    doc_id: str
    metric: MetricId
    per_k: dict[int, ChunkScoreSet]
    final: float
    placeholder_count: int


def _window_text(entries, joiner: str) -> str:
    # placeholders contribute neither text nor joiners; an all-placeholder
    # window falls back to the placeholder token itself (empty by default)
    parts = [e.text for e in entries if not e.is_placeholder]
    if parts:
        return joiner.join(parts)
    return entries[0].text


def make_units(pair: AlignedPair, k: int) -> list[ChunkUnit]:
    """The m-k+1 sliding units of size k over the aligned pair."""
    m = pair.m
    if k < 1:
        raise InvalidInput(f"chunk size must be >= 1, got {k}")
    if k > m:
        raise WindowTooLarge(f"chunk size {k} exceeds document length {m}")

    src_sentences = pair.src.sentences
    units = []
    for s in range(m - k + 1):
        unit = ChunkUnit(
            k=k,
            start=s,
            src_text=pair.src_joiner.join(src_sentences[s : s + k]),
            mt_text=_window_text(pair.tgt_reconstructed[s : s + k], pair.tgt_joiner),
            ref_text=(_window_text(pair.ref_reconstructed[s : s + k], pair.tgt_joiner)
                      if pair.ref_reconstructed is not None else None),
        )
        units.append(unit)
    return units


def evaluate_k(pair: AlignedPair, k: int, metric: MetricId,
               config: RunConfig | None = None) -> ChunkScoreSet:
    """Score every k-unit in one batch and average."""
    if metric.requires_reference and pair.ref_reconstructed is None:
        raise MetricContractError(
            f"metric {metric.name!r} is reference-based but the pair has no reference")
    units = make_units(pair, k)
    items = [
        ScoreItem(src=u.src_text, mt=u.mt_text,
                  ref=u.ref_text if metric.requires_reference else None)
        for u in units
    ]
    scores = score_batch(items, metric, config)
    return ChunkScoreSet(k=k, unit_scores=tuple(scores),
                         mean=math.fsum(scores) / len(scores))


def asd_score(pair: AlignedPair, metric: MetricId,
              ks: tuple[int, ...] = DEFAULT_KS,
              config: RunConfig | None = None) -> ASDResult:
    """Sliding evaluation at every feasible chunk size, averaged.

    Chunk sizes larger than the document are skipped; the final score is
    the unweighted mean of the remaining per-k means (k=1 is always
    feasible, so the result is never empty).
    """
    ks = tuple(sorted(set(ks)))
    if not ks or ks[0] < 1:
        raise InvalidInput(f"chunk sizes must be positive, got {ks}")
    per_k = {k: evaluate_k(pair, k, metric, config) for k in ks if k <= pair.m}
    final = math.fsum(cs.mean for cs in per_k.values()) / len(per_k)
    return ASDResult(doc_id=pair.src.doc_id, metric=metric, per_k=per_k,
                     final=final, placeholder_count=pair.placeholder_count)
