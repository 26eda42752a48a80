"""Access to the fixture files shipped with the package: published score
and rank tables used by the correlation tests, and the golden alignment
pair used by the path-search tests."""

from __future__ import annotations

import math
from importlib import resources
from pathlib import Path

from .errors import DataError
from .ranking import HumanRanking, SystemScore, load_ranking_file

RANKING_FIXTURES = (
    "wmt20_zhen_mqm",
    "wmt20_zhen_asd20",
    "wmt20_zhen_comet20",
    "wmt20_zhen_asd22",
    "wmt20_zhen_asdkiwi",
    "realworld_zhen_human",
    "realworld_zhen_asd20",
    "realworld_zhen_asd22",
    "realworld_zhen_asdkiwi",
    "realworld_enzh_human",
    "realworld_enzh_asd20",
    "realworld_enzh_asd22",
    "realworld_enzh_asdkiwi",
)


def fixture_path(name: str) -> Path:
    path = Path(str(resources.files("docasd").joinpath("data", name)))
    if not path.exists():
        raise DataError(f"no such fixture: {name}")
    return path


def load_ranking_fixture(name: str) -> HumanRanking:
    return load_ranking_file(fixture_path(f"{name}.json"))


def fixture_system_scores(name: str) -> list[SystemScore]:
    """A ranking fixture viewed as automatic-metric output.

    Fixtures without raw scores yield NaN scores; correlation then runs on
    ranks only.
    """
    ranking = load_ranking_fixture(name)
    scores = ranking.scores or {}
    return [SystemScore(system=system, score=scores.get(system, math.nan), rank=rank)
            for system, rank in sorted(ranking.ranks.items())]
