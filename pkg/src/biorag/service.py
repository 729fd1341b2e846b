"""HTTP front for the pipeline: ask, search, health, reindex.

The service loads its index at startup and refuses to start without one.
Reindexing builds a replacement off the read path and swaps the reference
atomically, so in-flight searches always finish on a complete index.
"""

from __future__ import annotations

import os
import sys
import threading
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import engine
from .chunking import ChunkingConfig, chunk_corpus
from .embedding import EmbeddingProviderConfig
from .errors import (
    BackendError,
    BackendUnreachable,
    BioragError,
    EmptyIndex,
    EmptyQuery,
    FingerprintMismatch,
    IoFailure,
    ProviderUnreachable,
    SchemaViolation,
)
from .index import RetrievalConfig, VectorIndex, build_index, load_index, save_index
from .engine import GenerationConfig
from .ingest import read_corpus


@dataclass
class ServiceConfig:
    listen_addr: str = "127.0.0.1:8080"
    index_path: str = "index.ragidx"
    provider: EmbeddingProviderConfig = field(default_factory=EmbeddingProviderConfig)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    generation: GenerationConfig = field(default_factory=GenerationConfig)
    cors_allowed_origins: list[str] = field(default_factory=list)


def _section(data: dict, name: str, cls):
    known = {f.name for f in fields(cls)}
    raw = data.get(name, {})
    unknown = set(raw) - known
    if unknown:
        raise SchemaViolation(f"[{name}] has unknown keys: {sorted(unknown)}")
    return cls(**raw)


def load_service_config(path: str | Path) -> ServiceConfig:
    """TOML file with [provider], [retrieval], [generation] sections; the
    listen address and backend URLs yield to environment overrides."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise IoFailure(f"{path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise SchemaViolation(f"{path}: {exc}") from exc

    config = ServiceConfig(
        listen_addr=data.get("listen_addr", "127.0.0.1:8080"),
        index_path=data.get("index_path", "index.ragidx"),
        provider=_section(data, "provider", EmbeddingProviderConfig),
        retrieval=_section(data, "retrieval", RetrievalConfig),
        generation=_section(data, "generation", GenerationConfig),
        cors_allowed_origins=list(data.get("cors_allowed_origins", [])),
    )
    if os.environ.get("BIORAG_LISTEN_ADDR"):
        config.listen_addr = os.environ["BIORAG_LISTEN_ADDR"]
    if os.environ.get("BIORAG_GENERATION_URL"):
        config.generation.endpoint_url = os.environ["BIORAG_GENERATION_URL"]
    if os.environ.get("BIORAG_EMBEDDING_URL"):
        config.provider.endpoint_url = os.environ["BIORAG_EMBEDDING_URL"]
    return config


class AskRequest(BaseModel):
    question: str
    mode: Literal["rag", "vanilla"] | None = None
    top_k: int | None = None


class SearchRequest(BaseModel):
    query: str
    top_k: int | None = None


class ChunkingRequest(BaseModel):
    strategy: Literal["recursive", "sentence", "adaptive"] = "recursive"
    chunk_size: int = 1000
    overlap: int = 150
    separators: list[str] | None = None


class ReindexRequest(BaseModel):
    corpus_path: str
    chunking: ChunkingRequest = ChunkingRequest()


_STATUS_BY_ERROR = [
    (EmptyQuery, 400, "EmptyQuestion"),
    (EmptyIndex, 503, "IndexUnavailable"),
    (FingerprintMismatch, 503, "FingerprintMismatch"),
    (BackendUnreachable, 502, "BackendUnreachable"),
    (BackendError, 502, "BackendError"),
    (ProviderUnreachable, 502, "ProviderUnreachable"),
]


def _error_response(exc: BioragError) -> JSONResponse:
    for err_type, status, code in _STATUS_BY_ERROR:
        if isinstance(exc, err_type):
            return JSONResponse(
                status_code=status, content={"error": code, "detail": str(exc)}
            )
    return JSONResponse(
        status_code=500, content={"error": type(exc).__name__, "detail": str(exc)}
    )


def _hit_payload(index: VectorIndex, hits) -> list[dict]:
    out = []
    for hit in hits:
        chunk = index.chunk_store[hit.chunk_id]
        out.append({
            "chunk_id": hit.chunk_id,
            "doc_id": chunk.doc_id,
            "score": hit.score,
            "rank": hit.rank,
            "text": chunk.text,
        })
    return out


def create_app(config: ServiceConfig, index: VectorIndex | None = None) -> FastAPI:
    """Build the application; loads the index from disk unless one is given."""
    if index is None and config.index_path:
        index = load_index(config.index_path)  # fail fast on a broken index

    app = FastAPI(title="biorag")
    if config.cors_allowed_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=config.cors_allowed_origins,
            allow_methods=["*"],
            allow_headers=["*"],
        )
    app.state.config = config
    app.state.index = index
    app.state.reindex_lock = threading.Lock()

    @app.exception_handler(BioragError)
    async def on_biorag_error(request: Request, exc: BioragError):
        return _error_response(exc)

    @app.get("/api/health")
    def health():
        current: VectorIndex | None = app.state.index
        if current is None:
            return JSONResponse(
                status_code=503,
                content={"error": "IndexUnavailable", "detail": "index not loaded"},
            )
        return {
            "status": "ok",
            "index_entries": len(current),
            "dimension": current.dimension,
            "embedder_fingerprint": current.embedder_fingerprint,
        }

    @app.post("/api/ask")
    def ask(body: AskRequest):
        question = body.question.strip()
        if not question:
            raise EmptyQuery("question is empty")
        if body.top_k is not None and body.top_k < 1:
            raise EmptyQuery("top_k must be at least 1")
        current: VectorIndex | None = app.state.index
        rcfg, gcfg = engine.with_overrides(
            config.retrieval, config.generation, mode=body.mode, top_k=body.top_k
        )
        answer = engine.ask(question, current, config.provider, rcfg, gcfg)
        sources = (
            _hit_payload(current, answer.prompt.included_hits) if current is not None else []
        )
        return {
            "answer": answer.text,
            "sources": sources if gcfg.mode == "rag" else [],
            "latency_ms": answer.latency_ms,
            "model": answer.model_name,
        }

    @app.post("/api/search")
    def search_endpoint(body: SearchRequest):
        query = body.query.strip()
        if not query:
            raise EmptyQuery("query is empty")
        if body.top_k is not None and body.top_k < 1:
            raise EmptyQuery("top_k must be at least 1")
        current: VectorIndex | None = app.state.index
        if current is None:
            raise EmptyIndex("index not loaded")
        if current.embedder_fingerprint != config.provider.fingerprint():
            raise FingerprintMismatch(current.embedder_fingerprint)
        from .embedding import embed_batch
        from .index import search as index_search

        rcfg, _ = engine.with_overrides(
            config.retrieval, config.generation, top_k=body.top_k
        )
        query_vec = embed_batch([query], config.provider)[0]
        hits = index_search(current, query_vec, rcfg)
        return {"hits": _hit_payload(current, hits)}

    @app.post("/api/reindex")
    def reindex(body: ReindexRequest):
        if not app.state.reindex_lock.acquire(blocking=False):
            return JSONResponse(
                status_code=409,
                content={"error": "ReindexInProgress", "detail": "another reindex is running"},
            )
        try:
            try:
                corpus = read_corpus(body.corpus_path)
                chunking_cfg = ChunkingConfig(
                    strategy=body.chunking.strategy,
                    chunk_size=body.chunking.chunk_size,
                    overlap=body.chunking.overlap,
                    separators=tuple(body.chunking.separators)
                    if body.chunking.separators is not None
                    else ChunkingConfig().separators,
                )
                chunks = chunk_corpus(corpus, chunking_cfg)
                if not chunks:
                    raise SchemaViolation("corpus produced no chunks")
                new_index = build_index(chunks, config.provider, corpus_name=corpus.name)
            except (ProviderUnreachable, BackendUnreachable, BackendError):
                raise
            except BioragError as exc:
                return JSONResponse(
                    status_code=400,
                    content={"error": "BadCorpus", "detail": str(exc)},
                )
            if config.index_path:
                save_index(new_index, config.index_path)
            app.state.index = new_index  # atomic reference swap
            return {"entries": len(new_index)}
        finally:
            app.state.reindex_lock.release()

    return app


def serve(config: ServiceConfig) -> None:
    import uvicorn

    host, _, port = config.listen_addr.rpartition(":")
    app = create_app(config)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
