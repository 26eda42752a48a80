"""HTTP surface of the scoring sidecar.

POST /v1/score takes {"metric", "items": [{src, mt, ref?}]} and returns
order-preserving {"scores": [...]}; GET /v1/health reports liveness and
the loaded models.  Behavior switches: SIDECAR_MODE=stub|real (default
real), SIDECAR_MAX_BATCH (default 128), SIDECAR_HOST / SIDECAR_PORT for
the bundled runner.
"""

from __future__ import annotations

import math
import os

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .registry import MetricRegistry, ModelLoadError, build_registry

DEFAULT_MAX_BATCH = 128


class ScoreItemModel(BaseModel):
    src: str = Field(min_length=1)
    mt: str = ""
    ref: str | None = None


class ScoreRequest(BaseModel):
    metric: str
    items: list[ScoreItemModel] = Field(min_length=1)


class ScoreResponse(BaseModel):
    scores: list[float]


class HealthResponse(BaseModel):
    status: str
    loaded_metrics: list[str]


def create_app(registry: MetricRegistry | None = None,
               max_batch: int | None = None) -> FastAPI:
    if registry is None:
        registry = build_registry(os.environ.get("SIDECAR_MODE", "real"))
    if max_batch is None:
        max_batch = int(os.environ.get("SIDECAR_MAX_BATCH", DEFAULT_MAX_BATCH))

    app = FastAPI(title="scorer sidecar", version="0.1.0")

    @app.exception_handler(ModelLoadError)
    async def handle_load_error(_: Request, exc: ModelLoadError) -> JSONResponse:
        return JSONResponse(status_code=503,
                            content={"error": "ModelLoadError", "detail": str(exc)})

    @app.get("/v1/health", response_model=HealthResponse)
    def health():
        if registry.loading():
            return JSONResponse(status_code=503, content={
                "status": "loading", "loaded_metrics": registry.loaded_metrics()})
        return HealthResponse(status="ok", loaded_metrics=registry.loaded_metrics())

    @app.post("/v1/score", response_model=ScoreResponse)
    def score(request: ScoreRequest):
        entry = registry.get(request.metric)
        if entry is None:
            return JSONResponse(status_code=400, content={
                "error": "UnknownMetric",
                "detail": f"no metric {request.metric!r}",
                "metrics": registry.names(),
            })
        if len(request.items) > max_batch:
            return JSONResponse(status_code=413, content={
                "error": "BatchTooLarge",
                "detail": f"{len(request.items)} items exceed max_batch={max_batch}",
            })
        for pos, item in enumerate(request.items):
            if entry.reference_based and item.ref is None:
                return JSONResponse(status_code=400, content={
                    "error": "MissingReference",
                    "detail": f"item {pos}: metric {request.metric!r} needs a reference",
                })
            if not entry.reference_based and item.ref is not None:
                return JSONResponse(status_code=400, content={
                    "error": "UnexpectedReference",
                    "detail": f"item {pos}: metric {request.metric!r} is reference-free",
                })

        items = [item.model_dump() for item in request.items]
        scores = registry.score(request.metric, items)
        if len(scores) != len(items) or not all(math.isfinite(s) for s in scores):
            return JSONResponse(status_code=500, content={
                "error": "BackendContract",
                "detail": "backend returned a malformed score vector",
            })
        return ScoreResponse(scores=scores)

    return app


def main() -> None:
    import uvicorn

    uvicorn.run(create_app(),
                host=os.environ.get("SIDECAR_HOST", "127.0.0.1"),
                port=int(os.environ.get("SIDECAR_PORT", "8090")))


if __name__ == "__main__":
    main()
