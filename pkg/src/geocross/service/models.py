"""Request/response models for the pipeline service.

Paths refer to the filesystem the service runs on; the CLI runs the same
handlers in-process by default, so local paths behave identically there.
Parameter defaults match the pipeline's standard configuration.
"""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator


class HealthResponse(BaseModel):
    status: str
    version: str


class VocabRequest(BaseModel):
    corpus: str
    output: str
    stopwords: str | None = None
    k: int = Field(default=20000, ge=1)
    min_freq: int = Field(default=100, ge=1)


class VocabResponse(BaseModel):
    words: int
    records: int
    rejected: dict[str, int]
    path: str


class ClusterRequest(BaseModel):
    corpus: str
    output: str
    modality: str = Field(pattern="^(time|space)$")
    bandwidth: float = Field(gt=0)
    time_mapping: str = Field(default="day", pattern="^(absolute|day|week)$")
    tol: float | None = Field(default=None, gt=0)
    max_iter: int = Field(default=200, ge=1)
    merge_radius: float | None = Field(default=None, gt=0)
    cell_size: float | None = Field(default=None, gt=0)


class ClusterResponse(BaseModel):
    modality: str
    modes: int
    points: int
    rejected: dict[str, int]
    path: str


class GraphRequest(BaseModel):
    corpus: str
    vocab: str
    time_model: str
    space_model: str
    output: str


class GraphResponse(BaseModel):
    nodes: dict[str, int]
    edges: int
    total_weight: int
    records: int
    path: str


class WalkRequest(BaseModel):
    graph: str
    output: str
    metapath: str = "W-W-L-W-W"
    num_walks: int = Field(default=30, ge=1)
    walk_length: int = Field(default=50, ge=2)
    seed: int = 1
    workers: int = Field(default=1, ge=1)


class WalkResponse(BaseModel):
    walks: int
    start_nodes: int
    attempted: int
    path: str


class EmbedRequest(BaseModel):
    walks: str
    output: str
    dim: int = Field(default=300, ge=1)
    window: int = Field(default=7, ge=1)
    negatives: int = Field(default=5, ge=1)
    epochs: int = Field(default=5, ge=1)
    learning_rate: float = Field(default=0.025, gt=0)
    seed: int = 1
    workers: int = Field(default=1, ge=1)


class EmbedResponse(BaseModel):
    nodes: int
    dim: int
    walks: int
    path: str


class QueryRequest(BaseModel):
    embeddings: str
    word: str | None = None
    time: int | None = None
    latlon: tuple[float, float] | None = None
    k: int = Field(default=10, ge=0)
    vocab: str | None = None
    time_model: str | None = None
    space_model: str | None = None
    geojson: str | None = None

    @model_validator(mode="after")
    def _exactly_one_query(self) -> "QueryRequest":
        given = sum(x is not None for x in (self.word, self.time, self.latlon))
        if given != 1:
            raise ValueError("exactly one of word, time, or latlon must be set")
        return self


class QueryHitModel(BaseModel):
    node: str
    score: float
    center: list[float] | None = None
    label: str | None = None


class QueryResponse(BaseModel):
    query: str
    results: dict[str, list[QueryHitModel]]
    geojson_path: str | None = None


class EvalRequest(BaseModel):
    test_corpus: str
    embeddings: str
    vocab: str
    time_model: str
    space_model: str
    k_eval: int | None = Field(default=None, ge=1)


class EvalResponse(BaseModel):
    text_mrr: float | None
    location_mrr: float | None
    overall_mrr: float
    queries: int
    skipped: int


class PipelineRequest(BaseModel):
    corpus: str
    workdir: str
    stopwords: str | None = None
    vocab_k: int = Field(default=20000, ge=1)
    min_freq: int = Field(default=100, ge=1)
    loc_bandwidth: float = Field(default=0.05, gt=0)
    time_bandwidth: float = Field(default=1000.0, gt=0)
    time_mapping: str = Field(default="day", pattern="^(absolute|day|week)$")
    metapath: str = "W-W-L-W-W"
    num_walks: int = Field(default=30, ge=1)
    walk_length: int = Field(default=50, ge=2)
    dim: int = Field(default=300, ge=1)
    window: int = Field(default=7, ge=1)
    negatives: int = Field(default=5, ge=1)
    epochs: int = Field(default=5, ge=1)
    learning_rate: float = Field(default=0.025, gt=0)
    seed: int = 1
    workers: int = Field(default=1, ge=1)


class PipelineResponse(BaseModel):
    files: dict[str, str]
    vocab: VocabResponse
    time_clusters: ClusterResponse
    space_clusters: ClusterResponse
    graph: GraphResponse
    walks: WalkResponse
    embeddings: EmbedResponse
    seconds: float
