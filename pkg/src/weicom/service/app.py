"""HTTP query service: corpus browsing and composed retrieval.

A thin adapter over the retrieval engine.  The corpus is immutable and
shared read-only across requests; no endpoint mutates state, so handling
is safely concurrent.  Reported scores are the exact values the ranking
used (calibrated/fused for weicom, raw cosine for the baselines).
"""

from __future__ import annotations

import mimetypes
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse

from ..errors import LambdaOutOfRange, UnknownImage, UnknownText, ZeroVector
from ..fusion import ComposedQuery, Method, retrieve
from ..store import Corpus, l2_normalize
from .schemas import (
    CorpusInfo,
    HealthResponse,
    RetrieveRequest,
    RetrieveResponse,
    RetrieveResult,
    VocabularyResponse,
)


class ServiceState:
    def __init__(
        self,
        corpus: Corpus | None = None,
        images_dir: str | Path | None = None,
        vocabulary_groups: dict[str, list[str]] | None = None,
    ):
        self.corpus = corpus
        self.images_dir = Path(images_dir) if images_dir else None
        self.vocabulary_groups = vocabulary_groups or {}


def vocabulary_groups_from_specs(specs, corpus: Corpus) -> dict[str, list[str]]:
    """Attribute -> sorted values that are actually in the corpus text table."""
    groups: dict[str, set[str]] = {}
    for spec in specs:
        for _, values in spec.entries:
            known = {v for v in values if v in corpus.texts}
            if known:
                groups.setdefault(spec.attribute, set()).update(known)
    return {attr: sorted(vals) for attr, vals in sorted(groups.items())}


def create_app(
    corpus: Corpus | None = None,
    images_dir: str | Path | None = None,
    vocabulary_groups: dict[str, list[str]] | None = None,
    cors_origins: list[str] | None = None,
) -> FastAPI:
    app = FastAPI(title="weicom", version="0.1.0")
    state = ServiceState(corpus, images_dir, vocabulary_groups)
    app.state.engine = state

    if cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=cors_origins,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    def require_corpus() -> Corpus:
        if state.corpus is None:
            raise HTTPException(status_code=503, detail="corpus not loaded")
        return state.corpus

    @app.get("/v1/health", response_model=HealthResponse)
    def health():
        corpus = require_corpus()
        return HealthResponse(
            status="ok", corpus=CorpusInfo(count=corpus.count, dim=corpus.dim)
        )

    @app.get("/v1/vocabulary", response_model=VocabularyResponse)
    def vocabulary():
        corpus = require_corpus()
        return VocabularyResponse(
            texts=sorted(corpus.texts.texts),
            attributes=state.vocabulary_groups,
        )

    def resolve_image_query(
        req: RetrieveRequest, corpus: Corpus
    ) -> tuple[np.ndarray, str | None]:
        if (req.query_image_id is None) == (req.query_image_embedding is None):
            raise HTTPException(
                400,
                "exactly one of query_image_id and query_image_embedding "
                "is required for this method",
            )
        if req.query_image_id is not None:
            try:
                return corpus.image_embedding(req.query_image_id), req.query_image_id
            except UnknownImage as exc:
                raise HTTPException(400, str(exc)) from None
        embedding = np.asarray(req.query_image_embedding, dtype=np.float64)
        if embedding.shape != (corpus.dim,):
            raise HTTPException(
                422, f"query_image_embedding has dim {embedding.shape}, corpus dim is {corpus.dim}"
            )
        try:
            return l2_normalize(embedding), None
        except ZeroVector as exc:
            raise HTTPException(400, str(exc)) from None

    def resolve_text_query(req: RetrieveRequest, corpus: Corpus) -> np.ndarray:
        if (req.query_text is None) == (req.query_text_embedding is None):
            raise HTTPException(
                400,
                "exactly one of query_text and query_text_embedding "
                "is required for this method",
            )
        if req.query_text is not None:
            try:
                return corpus.text_embedding(req.query_text)
            except UnknownText as exc:
                raise HTTPException(
                    400, f"{exc}; supply query_text_embedding for free-form text"
                ) from None
        embedding = np.asarray(req.query_text_embedding, dtype=np.float64)
        if embedding.shape != (corpus.dim,):
            raise HTTPException(
                422, f"query_text_embedding has dim {embedding.shape}, corpus dim is {corpus.dim}"
            )
        try:
            return l2_normalize(embedding)
        except ZeroVector as exc:
            raise HTTPException(400, str(exc)) from None

    @app.post("/v1/retrieve", response_model=RetrieveResponse)
    def retrieve_endpoint(req: RetrieveRequest):
        corpus = require_corpus()
        try:
            method = Method.parse(req.method, req.lambda_)
        except (ValueError, LambdaOutOfRange) as exc:
            raise HTTPException(400, str(exc)) from None
        if req.k < 1:
            raise HTTPException(400, f"k must be >= 1, got {req.k}")

        image_embedding = None
        query_image_id = None
        if method.needs_image:
            image_embedding, query_image_id = resolve_image_query(req, corpus)
        elif req.query_image_id is not None:
            # Allow excluding a known query image even for text-only ranking.
            try:
                query_image_id = req.query_image_id
                corpus.row_index(query_image_id)
            except UnknownImage as exc:
                raise HTTPException(400, str(exc)) from None
        text_embedding = resolve_text_query(req, corpus) if method.needs_text else None

        effective_exclude = bool(req.exclude_query_image and query_image_id)
        composed = ComposedQuery(
            image_embedding=image_embedding,
            text_embedding=text_embedding,
            query_image_id=query_image_id,
        )
        ranked = retrieve(
            composed, corpus, method, k=req.k, exclude_query_image=effective_exclude
        )
        results = [
            RetrieveResult(
                rank=i + 1,
                id=item.image_id,
                score=item.score,
                class_name=corpus.records[item.index].class_name,
                attributes=dict(corpus.records[item.index].attributes),
            )
            for i, item in enumerate(ranked)
        ]
        return RetrieveResponse(
            results=results,
            method=method.kind.value,
            lambda_=method.lam,
            k=req.k,
            exclude_query_image=effective_exclude,
        )

    @app.get("/v1/image/{image_id}")
    def image_bytes(image_id: str):
        require_corpus()
        if state.images_dir is None:
            raise HTTPException(501, "no images directory configured")
        if "/" in image_id or "\\" in image_id or ".." in image_id:
            raise HTTPException(400, "invalid image id")
        matches = sorted(state.images_dir.glob(f"{image_id}.*"))
        files = [m for m in matches if m.is_file()]
        if not files:
            raise HTTPException(404, f"no image file for id {image_id!r}")
        path = files[0]
        media_type = mimetypes.guess_type(path.name)[0] or "application/octet-stream"
        return FileResponse(path, media_type=media_type)

    return app
