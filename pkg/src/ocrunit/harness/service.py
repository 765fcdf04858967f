"""HTTP reward service for RL trainers: ``POST /v1/reward`` and ``GET /healthz``."""
from __future__ import annotations

import json
import logging
import os
from contextlib import asynccontextmanager
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ValidationError
from fastapi.concurrency import run_in_threadpool

from ..core import CandidatePage, TestStore
from ..reward import RewardConfig, compute_reward

log = logging.getLogger(__name__)

DEFAULT_MAX_BODY = 16 * 1024 * 1024
BIND_ENV = "OCRUNIT_BIND"


class RewardItem(BaseModel):
    doc_id: str
    completion: str
    finished: bool = True


class RewardRequest(BaseModel):
    items: List[RewardItem]
    include_outcomes: bool = False


def score_item(store: TestStore, cfg: RewardConfig, item: RewardItem, include_outcomes: bool = False) -> dict:
    """Reward entry for one completion; unknown documents yield an error entry."""
    if item.doc_id not in store:
        return {"doc_id": item.doc_id, "error": "unknown doc", "composite": None,
                "pass_rate": None, "eos_reward": None, "metadata_reward": None}
    page = CandidatePage.from_text(item.doc_id, item.completion, finished=item.finished)
    try:
        score = compute_reward(page, store[item.doc_id], cfg)
    except Exception as exc:  # noqa: BLE001 - isolate the item, keep the batch
        log.exception("scoring %s failed", item.doc_id)
        return {"doc_id": item.doc_id, "error": f"scoring failed: {exc}", "composite": None,
                "pass_rate": None, "eos_reward": None, "metadata_reward": None}
    return score.to_json(with_outcomes=include_outcomes)


def score_batch(store: TestStore, cfg: RewardConfig, request: RewardRequest, executor=None) -> List[dict]:
    def one(item):
        return score_item(store, cfg, item, request.include_outcomes)

    if executor is None:
        return [one(it) for it in request.items]
    return list(executor.map(one, request.items))


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=status)


def create_app(
    store: TestStore,
    cfg: RewardConfig = RewardConfig(),
    max_body_bytes: int = DEFAULT_MAX_BODY,
    workers: Optional[int] = None,
) -> FastAPI:
    executor = ThreadPoolExecutor(max_workers=workers or min(8, (os.cpu_count() or 2)))

    @asynccontextmanager
    async def lifespan(_app):
        yield
        executor.shutdown(wait=False)

    app = FastAPI(title="ocrunit reward service", lifespan=lifespan)
    app.state.executor = executor
    app.state.requests = 0

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "docs": len(store), "tests": store.num_tests}

    @app.post("/v1/reward")
    async def reward(request: Request):
        declared = request.headers.get("content-length")
        if declared and declared.isdigit() and int(declared) > max_body_bytes:
            return _error(413, f"request body exceeds {max_body_bytes} bytes")
        raw = b""
        async for chunk in request.stream():
            raw += chunk
            if len(raw) > max_body_bytes:
                return _error(413, f"request body exceeds {max_body_bytes} bytes")
        try:
            data = json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            return _error(400, f"malformed JSON: {exc}")
        try:
            req = RewardRequest.model_validate(data)
        except ValidationError as exc:
            return _error(400, f"invalid request: {exc.errors(include_url=False)}")
        app.state.requests += 1
        rewards = await run_in_threadpool(score_batch, store, cfg, req, executor)
        return {"rewards": rewards}

    return app


def resolve_bind(host: str, port: int) -> Tuple[str, int]:
    """``OCRUNIT_BIND=host:port`` overrides the given address."""
    env = os.environ.get(BIND_ENV)
    if env:
        h, _, p = env.rpartition(":")
        return (h or host), int(p)
    return host, port


def serve_rewards(store: TestStore, cfg: RewardConfig = RewardConfig(), host: str = "127.0.0.1",
                  port: int = 8000, max_body_bytes: int = DEFAULT_MAX_BODY) -> None:
    import uvicorn

    host, port = resolve_bind(host, port)
    log.info("serving %d docs on %s:%d", len(store), host, port)
    uvicorn.run(create_app(store, cfg, max_body_bytes), host=host, port=port, log_level="info")
