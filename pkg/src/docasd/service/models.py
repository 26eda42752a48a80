"""Request/response schemas of the evaluation service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class ConfigOverrides(BaseModel):
    """Per-request overrides of the server's base configuration."""

    metric_align: str | None = None
    metric_eval: str | None = None
    dp_mode: str | None = None
    allow_zero_step: bool | None = None
    ks: list[int] | None = None
    joiner: str | None = None
    placeholder: str | None = None
    batch_size: int | None = None
    cache_dir: str | None = None


class DocumentPayload(BaseModel):
    doc_id: str = ""
    src: str
    tgt: str
    src_lang: str
    tgt_lang: str
    ref: str | None = None
    config: ConfigOverrides | None = None


class ReconstructedEntryModel(BaseModel):
    text: str
    target_indices: list[int]
    is_placeholder: bool


class AlignResponse(BaseModel):
    doc_id: str
    path: list[list[int]] = Field(description="(source_index, target_index) pairs")
    total: float
    placeholder_count: int
    reconstructed: list[ReconstructedEntryModel]
    ref_reconstructed: list[ReconstructedEntryModel] | None = None


class ChunkScores(BaseModel):
    mean: float
    unit_scores: list[float]


class EvaluateResponse(BaseModel):
    doc_id: str
    metric: str
    final: float
    per_k: dict[int, ChunkScores]
    placeholder_count: int


class RewardRequest(BaseModel):
    src: str
    hypotheses: list[str] = Field(min_length=1)
    src_lang: str
    tgt_lang: str
    failure_reward: float = 0.0
    config: ConfigOverrides | None = None


class RewardResponse(BaseModel):
    rewards: list[float]


class RankRequest(BaseModel):
    scores: dict[str, float]
    higher_is_better: bool = True


class SystemScoreModel(BaseModel):
    system: str
    score: float
    rank: float


class RankResponse(BaseModel):
    systems: list[SystemScoreModel]


class HumanRankingModel(BaseModel):
    ranks: dict[str, float] | None = None
    scores: dict[str, float] | None = None
    higher_is_better: bool = True


class CorrelateRequest(BaseModel):
    human: HumanRankingModel
    auto: list[SystemScoreModel]


class CorrelateResponse(BaseModel):
    pearson_on_ranks: float
    kendall_tau: float
    k: int
    pearson_on_scores: float | None = None


class HealthResponse(BaseModel):
    status: str
    config: dict
