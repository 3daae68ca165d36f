"""HTTP surface over the scoring, annotation, and generation operations.

Endpoints call exactly the same library operations as the CLI. Error
mapping: malformed bodies are 400, precondition violations are 422,
provider failures are 502, and a saturated in-flight limit is 429.
"""

from __future__ import annotations

import io
import threading
from contextlib import contextmanager

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import AppConfig, ConfigError, make_annotator, make_generation_client
from .control import GenerationRequest, controlled_generate, verify_roundtrip
from .fusion import TagToken
from .judge import ChatClient
from .pipeline import RawExample, RecordError, StatsAccumulator, to_json_line
from .providers import ProviderUnavailable

INLINE_ANNOTATE_CAP = 100


class ScoreBody(BaseModel):
    knowledge: str
    response: str
    context: str = ""


class AnnotateBody(BaseModel):
    records: list


class GenerateBody(BaseModel):
    knowledge: str
    context: str
    tag: int
    temperature: float | None = None
    max_tokens: int | None = None


class _Limiter:
    def __init__(self, capacity: int):
        self._semaphore = threading.Semaphore(capacity)

    @contextmanager
    def slot(self):
        if not self._semaphore.acquire(blocking=False):
            raise HTTPException(status_code=429, detail="in-flight request limit saturated")
        try:
            yield
        finally:
            self._semaphore.release()


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise HTTPException(status_code=422, detail=message)


def create_app(config: AppConfig) -> FastAPI:
    app = FastAPI(title="faithctl", docs_url=None, redoc_url=None)
    annotator = make_annotator(config)
    try:
        generation_client: ChatClient | None = make_generation_client(config)
    except ConfigError:
        generation_client = None
    limiter = _Limiter(config.service.max_concurrent)

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.exception_handler(ProviderUnavailable)
    async def provider_failure(request: Request, exc: ProviderUnavailable):
        return JSONResponse(status_code=502, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/config")
    def effective_config():
        return {
            "weights": config.weights.as_dict(),
            "levels": config.levels,
            "mock_providers": config.mock_providers,
        }

    @app.post("/score")
    def score(body: ScoreBody):
        _require(bool(body.knowledge.strip()), "knowledge must be non-empty")
        with limiter.slot():
            annotated = annotator.annotate(
                RawExample(
                    id="score",
                    context=body.context,
                    knowledge=body.knowledge,
                    response=body.response,
                )
            )
        result = annotated.breakdown.as_dict()
        result["tag"] = annotated.tag.level
        result["flags"] = sorted(annotated.flags)
        return result

    @app.post("/annotate")
    def annotate(body: AnnotateBody):
        _require(
            len(body.records) <= INLINE_ANNOTATE_CAP,
            f"inline batches are capped at {INLINE_ANNOTATE_CAP} records",
        )
        _require(len(body.records) > 0, "records must be non-empty")
        lines = "\n".join(to_json_line(record) for record in body.records)
        stream = io.BytesIO(lines.encode("utf-8"))
        annotated = []
        errors = []
        acc = StatsAccumulator()
        with limiter.slot():
            for item in annotator.iter_corpus(stream, workers=config.workers):
                if isinstance(item, RecordError):
                    errors.append(item.as_dict())
                else:
                    annotated.append(item.as_dict())
                    acc.add(item)
        return {"annotated": annotated, "errors": errors, "stats": acc.finish().as_dict()}

    def _generation_request(body: GenerateBody) -> GenerationRequest:
        _require(bool(body.knowledge.strip()), "knowledge must be non-empty")
        _require(bool(body.context.strip()), "context must be non-empty")
        _require(
            0 <= body.tag <= config.levels,
            f"tag must be in [0, {config.levels}]",
        )
        temperature = (
            body.temperature if body.temperature is not None else config.llm.temperature
        )
        _require(temperature >= 0, "temperature must be >= 0")
        return GenerationRequest(
            context=body.context,
            knowledge=body.knowledge,
            tag=TagToken(body.tag, levels=config.levels),
            temperature=temperature,
            max_tokens=body.max_tokens,
        )

    def _generation_client() -> ChatClient:
        if generation_client is None:
            raise ProviderUnavailable("no LLM endpoint configured for generation")
        return generation_client

    @app.post("/generate")
    def generate(body: GenerateBody):
        request = _generation_request(body)
        with limiter.slot():
            text = controlled_generate(request, _generation_client(), config.llm.retry)
        return {"response": text}

    @app.post("/verify")
    def verify(body: GenerateBody):
        request = _generation_request(body)
        with limiter.slot():
            report = verify_roundtrip(
                request, _generation_client(), annotator, config.llm.retry
            )
        return report.as_dict()

    if config.service.cors_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.service.cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    if config.service.static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount(
            "/", StaticFiles(directory=config.service.static_dir, html=True), name="static"
        )

    # Exposed for tests that need to saturate or inspect service internals.
    app.state.limiter = limiter
    app.state.annotator = annotator
    return app
