"""HTTP embedding service.

Wire protocol::

    POST /v1/embed   {"lines": [str, ...]}
                  -> {"dim": int, "embeddings": [[float, ...], ...]}
    GET  /v1/health  -> {"status": "ok", "model": str, "dim": int,
                         "pooling": str}

Malformed bodies and empty line lists answer 400; model failures answer
500 with a message. Embedding values are float32 serialized exactly, so
clients that cast back to float32 recover the bits the exporter wrote.
"""

from __future__ import annotations

import logging

import uvicorn
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .encoder import LineEmbedder
from .pooling import POOLING_NOTE

log = logging.getLogger("zoneseg_exporter")


def create_app(embedder: LineEmbedder) -> FastAPI:
    app = FastAPI(title="zoneseg embedding exporter")

    @app.get("/v1/health")
    async def health():
        return {
            "status": "ok",
            "model": embedder.model_name,
            "dim": embedder.dim,
            "pooling": POOLING_NOTE,
        }

    @app.post("/v1/embed")
    async def embed(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return JSONResponse({"error": "request body must be JSON"}, status_code=400)
        if not isinstance(payload, dict) or "lines" not in payload:
            return JSONResponse({"error": 'expected {"lines": [...]}'}, status_code=400)
        lines = payload["lines"]
        if not isinstance(lines, list) or not all(isinstance(x, str) for x in lines):
            return JSONResponse({"error": "lines must be a list of strings"}, status_code=400)
        if len(lines) == 0:
            return JSONResponse({"error": "lines must be non-empty"}, status_code=400)
        try:
            rows = embedder.embed_lines(lines)
        except Exception as e:  # surface model failures as 500, not a crash
            log.exception("embedding failed")
            return JSONResponse({"error": f"embedding failed: {e}"}, status_code=500)
        return {
            "dim": embedder.dim,
            "embeddings": [[float(v) for v in row] for row in rows],
        }

    return app


def serve(host: str, port: int, model_name_or_path: str) -> None:
    embedder = LineEmbedder(model_name_or_path)
    log.info(
        "serving %s on %s:%d (dim %d, max length %d)",
        embedder.model_name, host, port, embedder.dim, embedder.max_length,
    )
    uvicorn.run(create_app(embedder), host=host, port=port, log_level="info")
