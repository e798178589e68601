"""HTTP service exposing the embedding, scoring, and reranking models."""

from __future__ import annotations

from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .models import (
    CheckpointEmbedModel,
    HashEmbedModel,
    HashScoreModel,
    LexicalRerankModel,
)


@dataclass
class SidecarSettings:
    embed: str | None = "hash"  # "hash[:dim]" or "checkpoint:<path>"
    score: str | None = "hash"
    rerank: str | None = "lexical"
    max_batch: int = 128
    extra: dict = field(default_factory=dict)


class EmbedRequest(BaseModel):
    phrases: list[str]


class ScoreItem(BaseModel):
    dimension: str
    prompt: str


class ScoreRequest(BaseModel):
    items: list[ScoreItem]


class Candidate(BaseModel):
    id: str
    text: str


class RerankRequest(BaseModel):
    query: str
    candidates: list[Candidate]


def _build_embed_model(spec: str | None):
    if spec is None:
        return None
    if spec == "hash":
        return HashEmbedModel()
    if spec.startswith("hash:"):
        return HashEmbedModel(dim=int(spec.split(":", 1)[1]))
    if spec.startswith("checkpoint:"):
        return CheckpointEmbedModel(spec.split(":", 1)[1])
    raise ValueError(f"unknown embed backend {spec!r}")


def _build_score_model(spec: str | None):
    if spec is None:
        return None
    if spec == "hash":
        return HashScoreModel()
    raise ValueError(f"unknown score backend {spec!r}")


def _build_rerank_model(spec: str | None):
    if spec is None:
        return None
    if spec == "lexical":
        return LexicalRerankModel()
    raise ValueError(f"unknown rerank backend {spec!r}")


def create_app(settings: SidecarSettings | None = None) -> FastAPI:
    settings = settings or SidecarSettings()
    embed_model = _build_embed_model(settings.embed)
    score_model = _build_score_model(settings.score)
    rerank_model = _build_rerank_model(settings.rerank)

    app = FastAPI(title="kpeval-sidecar")

    def _check_batch(size: int, what: str):
        if size == 0:
            raise HTTPException(status_code=400, detail=f"empty {what} batch")
        if size > settings.max_batch:
            raise HTTPException(
                status_code=400,
                detail=f"{what} batch of {size} exceeds limit {settings.max_batch}",
            )

    @app.get("/health")
    def health():
        models = [
            m.name for m in (embed_model, score_model, rerank_model) if m is not None
        ]
        return {"ready": bool(models), "models": models}

    @app.post("/embed")
    def embed(request: EmbedRequest):
        if embed_model is None:
            raise HTTPException(status_code=503, detail="embed model not loaded")
        _check_batch(len(request.phrases), "embed")
        vectors = embed_model.embed(request.phrases)
        return {"dim": embed_model.dim, "vectors": vectors}

    @app.post("/score")
    def score(request: ScoreRequest):
        if score_model is None:
            raise HTTPException(status_code=503, detail="score model not loaded")
        _check_batch(len(request.items), "score")
        pairs = score_model.score([(i.dimension, i.prompt) for i in request.items])
        return {"scores": [{"p_yes": y, "p_no": n} for y, n in pairs]}

    @app.post("/rerank")
    def rerank(request: RerankRequest):
        if rerank_model is None:
            raise HTTPException(status_code=503, detail="rerank model not loaded")
        _check_batch(len(request.candidates), "rerank")
        ids = [c.id for c in request.candidates]
        if len(set(ids)) != len(ids):
            raise HTTPException(status_code=400, detail="duplicate candidate ids")
        ranked = rerank_model.rerank(
            request.query, [(c.id, c.text) for c in request.candidates]
        )
        return {"ranked": [{"id": doc_id, "score": s} for doc_id, s in ranked]}

    return app
