"""Stateless embedding service: POST /embed and GET /healthz.

The encoder loads once at startup; requests hold no per-request state, so
any request ordering yields the same per-request responses. Batches are
capped at 256 texts of at most 4096 UTF-8 bytes each; responses are
order-aligned unit vectors.
"""

from __future__ import annotations

import os
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .encoder import DEFAULT_MODEL_ID, load_encoder

MAX_BATCH = 256
MAX_TEXT_BYTES = 4096


class EmbedRequest(BaseModel):
    texts: list[str]


def create_app(model_id: str | None = None) -> FastAPI:
    resolved = model_id or os.environ.get("EMBED_MODEL_ID", DEFAULT_MODEL_ID)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        try:
            app.state.encoder = load_encoder(resolved)
        except Exception:                      # stays unhealthy: 503s below
            app.state.encoder = None
        yield

    app = FastAPI(title="embed-sidecar", lifespan=lifespan)
    app.state.encoder = None

    @app.get("/healthz")
    async def healthz():
        encoder = app.state.encoder
        if encoder is None:
            return JSONResponse(status_code=503,
                                content={"status": "loading"})
        return {"status": "ok", "model_id": encoder.model_id,
                "dim": encoder.dim}

    @app.post("/embed")
    async def embed(request: EmbedRequest):
        encoder = app.state.encoder
        if encoder is None:
            return JSONResponse(status_code=503,
                                content={"error": "model not loaded"})
        texts = request.texts
        if not texts:
            return JSONResponse(status_code=400,
                                content={"error": "empty batch"})
        if len(texts) > MAX_BATCH:
            return JSONResponse(
                status_code=400,
                content={"error": f"batch exceeds {MAX_BATCH} texts"})
        for index, text in enumerate(texts):
            if len(text.encode("utf-8")) > MAX_TEXT_BYTES:
                return JSONResponse(
                    status_code=400,
                    content={"error": "text too large", "index": index})
        vectors = encoder.encode(texts)
        return {"vectors": vectors.tolist(), "model_id": encoder.model_id,
                "dim": encoder.dim}

    return app


def serve() -> None:
    import uvicorn
    port = int(os.environ.get("EMBED_PORT", "8090"))
    uvicorn.run(create_app(), host="0.0.0.0", port=port)


if __name__ == "__main__":
    serve()
