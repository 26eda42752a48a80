"""Monotone source-target alignment over the similarity matrix.

Each target sentence t is assigned one source index s_t with
s_0 <= s_1 <= ... <= s_{n-1}; strict mode additionally pins s_0 = 0 and
s_{n-1} = m-1.  The maximum-total assignment is found in O(m*n) with a
running prefix maximum, and the target sequence is then rebuilt anchored
on the source: every source sentence receives the concatenation of its
matched targets, or a placeholder when nothing matched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator, Sequence

import numpy as np

from .config import RunConfig, resolve_joiner
from .errors import InfeasiblePath, InvalidInput, OracleTooLarge
from .scorer import SimilarityMatrix, build_matrix
from .segmentation import SentenceList, segment

MODES = ("strict", "relaxed")

# Upper bound on paths the exhaustive oracle will enumerate.
MAX_ORACLE_PATHS = 10_000_000


@dataclass(frozen=True)
class AlignmentPath:
    """Optimal assignment: one (source_index, target_index) pair per target,
    in target order, with the summed matrix value along the path."""

    pairs: tuple[tuple[int, int], ...]
    total: float

    def source_indices(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.pairs)

    def validate(self, m: int, n: int, mode: str = "strict") -> None:
        if len(self.pairs) != n:
            raise InvalidInput(f"path has {len(self.pairs)} pairs for n={n}")
        prev = -1
        for t, (s, tt) in enumerate(self.pairs):
            if tt != t:
                raise InvalidInput("target indices must be 0..n-1 in order")
            if s < prev or not 0 <= s < m:
                raise InvalidInput("source indices must be non-decreasing and in range")
            prev = s
        if mode == "strict" and (self.pairs[0][0] != 0 or self.pairs[-1][0] != m - 1):
            raise InvalidInput("strict path must start at source 0 and end at source m-1")


@dataclass(frozen=True)
class ReconstructedEntry:
    """One slot of the rebuilt target: the concatenated matched target
    sentences, or the placeholder when the source sentence went missing."""

    text: str
    target_indices: tuple[int, ...]
    is_placeholder: bool


@dataclass(frozen=True)
class AlignedPair:
    """Source sentences plus the length-m reconstructed target (and
    optionally a reconstructed reference aligned the same way)."""

    src: SentenceList
    tgt_reconstructed: tuple[ReconstructedEntry, ...]
    path: AlignmentPath
    placeholder_count: int
    src_joiner: str
    tgt_joiner: str
    ref_reconstructed: tuple[ReconstructedEntry, ...] | None = None

    @property
    def m(self) -> int:
        return len(self.src)

    def validate(self) -> None:
        if len(self.tgt_reconstructed) != self.m:
            raise InvalidInput("reconstruction length must equal source length")
        n = len(self.path.pairs)
        seen: list[int] = []
        for entry in self.tgt_reconstructed:
            idxs = entry.target_indices
            if entry.is_placeholder != (len(idxs) == 0):
                raise InvalidInput("placeholder flag inconsistent with target indices")
            if idxs and list(idxs) != list(range(idxs[0], idxs[-1] + 1)):
                raise InvalidInput("entry target indices must be contiguous ascending")
            seen.extend(idxs)
        if seen != list(range(n)):
            raise InvalidInput("entries must partition target indices 0..n-1 in order")


def _path_total(values: np.ndarray, sources: Sequence[int]) -> float:
    # left-to-right accumulation; keep identical to the DP's order
    total = 0.0
    for t, s in enumerate(sources):
        total += float(values[s, t])
    return total


def dp_search(matrix: SimilarityMatrix, mode: str = "strict", *,
              allow_zero_step: bool = True) -> AlignmentPath:
    """Maximum-total monotone path via dynamic programming.

    Ties are broken toward the smallest source index at every backtrack
    step, so results are identical across platforms.  ``allow_zero_step``
    permits several targets to share one source sentence (the default);
    disabling it forces strictly increasing source indices.
    """
    if mode not in MODES:
        raise InvalidInput(f"mode must be one of {MODES}")
    values = matrix.values
    m, n = matrix.m, matrix.n

    dp = np.full((n, m), -np.inf, dtype=np.float64)
    if mode == "strict":
        dp[0, 0] = values[0, 0]
    else:
        dp[0, :] = values[:, 0]
    for t in range(1, n):
        best_prev = np.maximum.accumulate(dp[t - 1])
        if not allow_zero_step:
            best_prev = np.concatenate(([-np.inf], best_prev[:-1]))
        dp[t] = values[:, t] + best_prev

    if mode == "strict":
        end = m - 1
        if not math.isfinite(dp[n - 1, end]):
            raise InfeasiblePath(
                f"no path from source 0 to source {m - 1} over {n} target(s); "
                "use relaxed mode")
    else:
        end = int(np.argmax(dp[n - 1]))
        if not math.isfinite(dp[n - 1, end]):
            raise InfeasiblePath("no feasible path")

    sources = [end]
    s = end
    for t in range(n - 1, 0, -1):
        upper = s + 1 if allow_zero_step else s
        s = int(np.argmax(dp[t - 1][:upper]))  # first argmax = smallest index
        sources.append(s)
    sources.reverse()

    pairs = tuple((s, t) for t, s in enumerate(sources))
    return AlignmentPath(pairs=pairs, total=_path_total(values, sources))


def _count_monotone_paths(m: int, n: int, mode: str, allow_zero_step: bool) -> int:
    if allow_zero_step:
        if mode == "relaxed":
            return math.comb(n + m - 1, n)
        if n == 1:
            return 1 if m == 1 else 0
        return math.comb(n - 2 + m - 1, n - 2)
    if mode == "relaxed":
        return math.comb(m, n)
    if n == 1:
        return 1 if m == 1 else 0
    return math.comb(m - 2, n - 2) if m >= 2 and n >= 2 else 0


def _enumerate_sources(m: int, n: int, mode: str,
                       allow_zero_step: bool) -> Iterator[tuple[int, ...]]:
    first_choices = [0] if mode == "strict" else range(m)
    step = 0 if allow_zero_step else 1

    def extend(prefix: list[int]) -> Iterator[tuple[int, ...]]:
        if len(prefix) == n:
            if mode == "strict" and prefix[-1] != m - 1:
                return
            yield tuple(prefix)
            return
        for s in range(prefix[-1] + step, m):
            prefix.append(s)
            yield from extend(prefix)
            prefix.pop()

    for s0 in first_choices:
        yield from extend([s0])


def brute_force_search(matrix: SimilarityMatrix, mode: str = "strict", *,
                       allow_zero_step: bool = True) -> AlignmentPath:
    """Exhaustive oracle for dp_search: enumerates every valid path and
    applies the same tie-break (among maximal totals, the path whose
    reversed source sequence is lexicographically smallest, which is what
    smallest-index backtracking produces)."""
    if mode not in MODES:
        raise InvalidInput(f"mode must be one of {MODES}")
    m, n = matrix.m, matrix.n
    count = _count_monotone_paths(m, n, mode, allow_zero_step)
    if count > MAX_ORACLE_PATHS:
        raise OracleTooLarge(f"{count} candidate paths exceed {MAX_ORACLE_PATHS}")

    values = matrix.values
    best: tuple[int, ...] | None = None
    best_total = -math.inf
    for sources in _enumerate_sources(m, n, mode, allow_zero_step):
        total = _path_total(values, sources)
        if total > best_total:
            best, best_total = sources, total
        elif total == best_total and best is not None:
            if sources[::-1] < best[::-1]:
                best = sources
    if best is None:
        raise InfeasiblePath(f"no feasible path for m={m}, n={n}, mode={mode}")
    pairs = tuple((s, t) for t, s in enumerate(best))
    return AlignmentPath(pairs=pairs, total=best_total)


def reconstruct(src: SentenceList, tgt: SentenceList, path: AlignmentPath,
                placeholder: str = "", joiner_policy: str = "auto") -> AlignedPair:
    """Rebuild the target anchored on the source.

    Source index i receives all target sentences the path assigned to it,
    concatenated in target order; unmatched sources get the placeholder.
    Placeholders never contribute joiners.
    """
    m, n = len(src), len(tgt)
    path.validate(m, n, mode="relaxed")  # endpoint rule already applied by search

    src_joiner = resolve_joiner(joiner_policy, src.language)
    tgt_joiner = resolve_joiner(joiner_policy, tgt.language)

    matched: dict[int, list[int]] = {}
    for s, t in path.pairs:
        matched.setdefault(s, []).append(t)

    entries = []
    placeholder_count = 0
    for i in range(m):
        idxs = matched.get(i, [])
        if not idxs:
            entries.append(ReconstructedEntry(text=placeholder, target_indices=(),
                                              is_placeholder=True))
            placeholder_count += 1
        else:
            text = tgt_joiner.join(tgt.sentences[t] for t in idxs)
            entries.append(ReconstructedEntry(text=text, target_indices=tuple(idxs),
                                              is_placeholder=False))

    pair = AlignedPair(src=src, tgt_reconstructed=tuple(entries), path=path,
                       placeholder_count=placeholder_count,
                       src_joiner=src_joiner, tgt_joiner=tgt_joiner)
    pair.validate()
    return pair


def align_document(src_doc: str, tgt_doc: str, src_lang: str, tgt_lang: str,
                   config: RunConfig | None = None, *, ref_doc: str | None = None,
                   doc_id: str = "") -> AlignedPair:
    """Segment, score, path-search and reconstruct in one call.

    When a reference document is supplied it is aligned to the same source
    segmentation by the identical procedure and attached to the pair, so
    reference-based evaluation sees a reference with exactly m entries.
    """
    config = config or RunConfig()
    src = segment(src_doc, src_lang, config.segmenter, doc_id=doc_id)
    tgt = segment(tgt_doc, tgt_lang, config.segmenter, doc_id=doc_id)
    pair = _align_lists(src, tgt, config)
    if ref_doc is not None:
        ref = segment(ref_doc, tgt_lang, config.segmenter, doc_id=doc_id)
        ref_pair = _align_lists(src, ref, config)
        pair = replace(pair, ref_reconstructed=ref_pair.tgt_reconstructed)
    return pair


def _align_lists(src: SentenceList, tgt: SentenceList, config: RunConfig) -> AlignedPair:
    matrix = build_matrix(src, tgt, config.metric_align, config)
    path = dp_search(matrix, config.dp_mode, allow_zero_step=config.allow_zero_step)
    return reconstruct(src, tgt, path, placeholder=config.placeholder,
                       joiner_policy=config.joiner)
