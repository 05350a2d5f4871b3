"""Request and response models for the JSON-over-HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class CorpusInfo(BaseModel):
    count: int
    dim: int


class HealthResponse(BaseModel):
    status: str
    corpus: CorpusInfo


class VocabularyResponse(BaseModel):
    texts: list[str]
    attributes: dict[str, list[str]]


class RetrieveRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    query_image_id: str | None = None
    query_image_embedding: list[float] | None = None
    query_text: str | None = None
    query_text_embedding: list[float] | None = None
    method: str = "weicom"
    lambda_: float = Field(default=0.5, alias="lambda")
    k: int = 50
    exclude_query_image: bool = False


class RetrieveResult(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    rank: int
    id: str
    score: float
    class_name: str = Field(alias="class")
    attributes: dict[str, str]


class RetrieveResponse(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    results: list[RetrieveResult]
    method: str
    lambda_: float = Field(alias="lambda")
    k: int
    exclude_query_image: bool
