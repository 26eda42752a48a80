"""System ranking and agreement with human rankings.

The headline agreement number is Pearson over the two rank vectors
(numerically Spearman's rho when ties are absent) together with Kendall's
tau-b; raw-score Pearson is carried alongside for transparency when both
sides have raw scores.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .errors import DataError, DegenerateInput, InvalidInput


@dataclass(frozen=True)
class SystemScore:
    """One system's aggregate score and its rank (1 = best)."""

    system: str
    score: float
    rank: float


@dataclass(frozen=True)
class HumanRanking:
    """Human judgment over the same system set: ranks, and optionally the
    raw scores they came from (e.g. MQM, where lower is better)."""

    ranks: dict[str, float]
    scores: dict[str, float] | None = None
    higher_is_better: bool = True

    @classmethod
    def from_scores(cls, scores: Mapping[str, float],
                    higher_is_better: bool = True) -> "HumanRanking":
        ranked = rank_systems(scores, higher_is_better=higher_is_better)
        return cls(ranks={r.system: r.rank for r in ranked},
                   scores=dict(scores), higher_is_better=higher_is_better)

    def systems(self) -> set[str]:
        return set(self.ranks)


@dataclass(frozen=True)
class CorrelationReport:
    """Agreement between an automatic ranking and a human one."""

    pearson_on_ranks: float
    kendall_tau: float
    K: int
    pearson_on_scores: float | None = None


def rank_systems(scores: Mapping[str, float] | Iterable[tuple[str, float]],
                 higher_is_better: bool = True) -> list[SystemScore]:
    """Rank systems by score, 1 = best; exact ties share the average rank."""
    if isinstance(scores, Mapping):
        pairs = list(scores.items())
    else:
        pairs = list(scores)
        names = [name for name, _ in pairs]
        if len(names) != len(set(names)):
            raise InvalidInput("duplicate system names")
    if len(pairs) < 2:
        raise InvalidInput("ranking needs at least two systems")
    values = np.array([float(v) for _, v in pairs], dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise InvalidInput("system scores must be finite")
    keyed = -values if higher_is_better else values
    ranks = stats.rankdata(keyed, method="average")
    result = [SystemScore(system=name, score=float(v), rank=float(r))
              for (name, _), v, r in zip(pairs, values, ranks)]
    result.sort(key=lambda s: (s.rank, s.system))
    return result


def _check_vectors(x: Sequence[float], y: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise InvalidInput("vectors must be one-dimensional and equal length")
    if len(xa) < 2:
        raise DegenerateInput("correlation needs at least two points")
    if np.ptp(xa) == 0 or np.ptp(ya) == 0:
        raise DegenerateInput("correlation undefined for zero-variance input")
    return xa, ya


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    xa, ya = _check_vectors(x, y)
    r = float(stats.pearsonr(xa, ya).statistic)
    if math.isnan(r):
        raise DegenerateInput("pearson is undefined for this input")
    return r


def kendall(x: Sequence[float], y: Sequence[float]) -> float:
    """Kendall's tau-b (equals tau-a when there are no ties)."""
    xa, ya = _check_vectors(x, y)
    tau = float(stats.kendalltau(xa, ya, variant="b").statistic)
    if math.isnan(tau):
        raise DegenerateInput("kendall tau is undefined for this input")
    return tau


def correlate_rankings(human: HumanRanking,
                       auto: Sequence[SystemScore]) -> CorrelationReport:
    """Pearson-on-ranks and Kendall's tau between a human ranking and an
    automatic one over the identical system set."""
    auto_by_name = {s.system: s for s in auto}
    if len(auto_by_name) != len(auto):
        raise InvalidInput("duplicate system names in automatic ranking")
    human_set, auto_set = human.systems(), set(auto_by_name)
    if human_set != auto_set:
        missing = sorted(human_set - auto_set)
        extra = sorted(auto_set - human_set)
        raise InvalidInput(
            f"system sets differ; missing from automatic: {missing}, extra: {extra}")

    names = sorted(human_set)
    human_ranks = [human.ranks[name] for name in names]
    auto_ranks = [auto_by_name[name].rank for name in names]

    pearson_on_scores = None
    if human.scores is not None:
        auto_scores = [auto_by_name[name].score for name in names]
        human_scores = [human.scores[name] for name in names]
        if all(math.isfinite(v) for v in auto_scores + human_scores):
            try:
                pearson_on_scores = pearson(human_scores, auto_scores)
            except DegenerateInput:
                pearson_on_scores = None

    return CorrelationReport(
        pearson_on_ranks=pearson(human_ranks, auto_ranks),
        kendall_tau=kendall(human_ranks, auto_ranks),
        K=len(names),
        pearson_on_scores=pearson_on_scores,
    )


def load_ranking_file(path: str | Path) -> HumanRanking:
    """Read a ranking file: {"ranks": {...}} and/or {"scores": {...},
    "higher_is_better": bool}.  Explicit ranks win over scores."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read ranking file {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise DataError(f"ranking file {path} must hold a JSON object")
    higher = bool(payload.get("higher_is_better", True))
    ranks = payload.get("ranks")
    scores = payload.get("scores")
    if ranks is not None:
        return HumanRanking(
            ranks={str(k): float(v) for k, v in ranks.items()},
            scores={str(k): float(v) for k, v in scores.items()} if scores else None,
            higher_is_better=higher)
    if scores is not None:
        return HumanRanking.from_scores(
            {str(k): float(v) for k, v in scores.items()}, higher_is_better=higher)
    raise DataError(f"ranking file {path} needs 'ranks' or 'scores'")
