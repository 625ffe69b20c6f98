"""FastAPI application wrapping the pipeline stages and query engine."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import GeoCrossError
from . import handlers, models


def create_app() -> FastAPI:
    app = FastAPI(
        title="geocross",
        version=__version__,
        description=(
            "Pipeline service for joint time-location-word embeddings: "
            "vocabulary, mean-shift clustering, co-occurrence graph, metapath "
            "walks, skip-gram training, and cross-modal queries."
        ),
    )

    @app.exception_handler(GeoCrossError)
    async def _domain_error(request: Request, exc: GeoCrossError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(FileNotFoundError)
    async def _missing_file(request: Request, exc: FileNotFoundError) -> JSONResponse:
        return JSONResponse(status_code=404, content={"detail": f"missing file: {exc.filename}"})

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=models.HealthResponse)
    def health() -> models.HealthResponse:
        return models.HealthResponse(status="ok", version=__version__)

    @app.post("/vocab", response_model=models.VocabResponse)
    def vocab(req: models.VocabRequest) -> models.VocabResponse:
        return handlers.vocab(req)

    @app.post("/cluster", response_model=models.ClusterResponse)
    def cluster(req: models.ClusterRequest) -> models.ClusterResponse:
        return handlers.cluster(req)

    @app.post("/graph", response_model=models.GraphResponse)
    def graph(req: models.GraphRequest) -> models.GraphResponse:
        return handlers.graph(req)

    @app.post("/walk", response_model=models.WalkResponse)
    def walk(req: models.WalkRequest) -> models.WalkResponse:
        return handlers.walk(req)

    @app.post("/embed", response_model=models.EmbedResponse)
    def embed(req: models.EmbedRequest) -> models.EmbedResponse:
        return handlers.embed(req)

    @app.post("/query", response_model=models.QueryResponse)
    def query(req: models.QueryRequest) -> models.QueryResponse:
        return handlers.query(req)

    @app.post("/eval", response_model=models.EvalResponse)
    def eval_(req: models.EvalRequest) -> models.EvalResponse:
        return handlers.eval_(req)

    @app.post("/pipeline", response_model=models.PipelineResponse)
    def pipeline(req: models.PipelineRequest) -> models.PipelineResponse:
        return handlers.pipeline(req)

    return app


app = create_app()
