"""FastAPI service exposing the evaluation pipeline.

Long-running deployments (reward serving for RL training, shared
evaluation backends) talk to these endpoints; the CLI covers one-shot
batch use of the same operations.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..alignment import AlignedPair, align_document
from ..config import RunConfig
from ..datapipe import reward_batch
from ..errors import DocasdError, ScorerUnavailable
from ..ranking import HumanRanking, SystemScore, correlate_rankings, rank_systems
from ..slide_eval import asd_score
from .models import (
    AlignResponse,
    ChunkScores,
    ConfigOverrides,
    CorrelateRequest,
    CorrelateResponse,
    DocumentPayload,
    EvaluateResponse,
    HealthResponse,
    RankRequest,
    RankResponse,
    ReconstructedEntryModel,
    RewardRequest,
    RewardResponse,
    SystemScoreModel,
)


def _apply_overrides(base: RunConfig, overrides: ConfigOverrides | None) -> RunConfig:
    if overrides is None:
        return base
    fields = overrides.model_dump(exclude_none=True)
    if "ks" in fields:
        fields["ks"] = tuple(fields["ks"])
    return base.with_overrides(**fields)


def _entries(entries) -> list[ReconstructedEntryModel]:
    return [
        ReconstructedEntryModel(text=e.text, target_indices=list(e.target_indices),
                                is_placeholder=e.is_placeholder)
        for e in entries
    ]


def _align_payload(payload: DocumentPayload, config: RunConfig) -> AlignedPair:
    return align_document(payload.src, payload.tgt, payload.src_lang,
                          payload.tgt_lang, config, ref_doc=payload.ref,
                          doc_id=payload.doc_id)


def create_app(config: RunConfig | None = None) -> FastAPI:
    base_config = config or RunConfig()
    app = FastAPI(title="docasd evaluation service", version=__version__)

    @app.exception_handler(DocasdError)
    async def handle_docasd_error(_: Request, exc: DocasdError) -> JSONResponse:
        status = 503 if isinstance(exc, ScorerUnavailable) else 400
        return JSONResponse(status_code=status,
                            content={"error": type(exc).__name__, "detail": str(exc)})

    @app.get("/v1/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", config=base_config.echo())

    @app.post("/v1/align", response_model=AlignResponse)
    def align(payload: DocumentPayload) -> AlignResponse:
        cfg = _apply_overrides(base_config, payload.config)
        pair = _align_payload(payload, cfg)
        return AlignResponse(
            doc_id=payload.doc_id,
            path=[list(p) for p in pair.path.pairs],
            total=pair.path.total,
            placeholder_count=pair.placeholder_count,
            reconstructed=_entries(pair.tgt_reconstructed),
            ref_reconstructed=(_entries(pair.ref_reconstructed)
                               if pair.ref_reconstructed is not None else None),
        )

    @app.post("/v1/evaluate", response_model=EvaluateResponse)
    def evaluate(payload: DocumentPayload) -> EvaluateResponse:
        cfg = _apply_overrides(base_config, payload.config)
        pair = _align_payload(payload, cfg)
        result = asd_score(pair, cfg.metric_eval, ks=cfg.ks, config=cfg)
        return EvaluateResponse(
            doc_id=payload.doc_id,
            metric=result.metric.name,
            final=result.final,
            per_k={k: ChunkScores(mean=cs.mean, unit_scores=list(cs.unit_scores))
                   for k, cs in sorted(result.per_k.items())},
            placeholder_count=result.placeholder_count,
        )

    @app.post("/v1/reward", response_model=RewardResponse)
    def reward_endpoint(payload: RewardRequest) -> RewardResponse:
        cfg = _apply_overrides(base_config, payload.config)
        rewards = reward_batch(payload.src, payload.hypotheses, cfg.metric_eval,
                               cfg, src_lang=payload.src_lang,
                               tgt_lang=payload.tgt_lang,
                               failure_reward=payload.failure_reward)
        return RewardResponse(rewards=rewards)

    @app.post("/v1/rank", response_model=RankResponse)
    def rank(payload: RankRequest) -> RankResponse:
        ranked = rank_systems(payload.scores, higher_is_better=payload.higher_is_better)
        return RankResponse(systems=[
            SystemScoreModel(system=s.system, score=s.score, rank=s.rank)
            for s in ranked
        ])

    @app.post("/v1/correlate", response_model=CorrelateResponse)
    def correlate(payload: CorrelateRequest) -> CorrelateResponse:
        if payload.human.ranks is not None:
            human = HumanRanking(ranks=payload.human.ranks,
                                 scores=payload.human.scores,
                                 higher_is_better=payload.human.higher_is_better)
        elif payload.human.scores is not None:
            human = HumanRanking.from_scores(payload.human.scores,
                                             payload.human.higher_is_better)
        else:
            return JSONResponse(status_code=400, content={
                "error": "InvalidInput",
                "detail": "human ranking needs 'ranks' or 'scores'"})
        auto = [SystemScore(system=s.system, score=s.score, rank=s.rank)
                for s in payload.auto]
        report = correlate_rankings(human, auto)
        return CorrelateResponse(pearson_on_ranks=report.pearson_on_ranks,
                                 kendall_tau=report.kendall_tau,
                                 k=report.K,
                                 pearson_on_scores=report.pearson_on_scores)

    return app


def default_app() -> FastAPI:
    """App with configuration from DOCASD_* environment variables."""
    import os

    kwargs = {}
    if os.environ.get("DOCASD_SIDECAR_URL"):
        kwargs["sidecar_url"] = os.environ["DOCASD_SIDECAR_URL"]
    if os.environ.get("DOCASD_METRIC_ALIGN"):
        kwargs["metric_align"] = os.environ["DOCASD_METRIC_ALIGN"]
    if os.environ.get("DOCASD_METRIC_EVAL"):
        kwargs["metric_eval"] = os.environ["DOCASD_METRIC_EVAL"]
    if os.environ.get("DOCASD_CACHE_DIR"):
        kwargs["cache_dir"] = os.environ["DOCASD_CACHE_DIR"]
    return create_app(RunConfig(**kwargs))
