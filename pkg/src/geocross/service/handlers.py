"""Stage handlers shared by the FastAPI endpoints and the in-process CLI path."""

from __future__ import annotations

from dataclasses import asdict

from .. import stages
from . import models


def vocab(req: models.VocabRequest) -> models.VocabResponse:
    out = stages.stage_vocab(
        req.corpus, req.output, stopwords=req.stopwords, k=req.k, min_freq=req.min_freq
    )
    return models.VocabResponse(**asdict(out))


def cluster(req: models.ClusterRequest) -> models.ClusterResponse:
    out = stages.stage_cluster(
        req.corpus,
        req.output,
        modality=req.modality,
        bandwidth=req.bandwidth,
        time_mapping=req.time_mapping,
        tol=req.tol,
        max_iter=req.max_iter,
        merge_radius=req.merge_radius,
        cell_size=req.cell_size,
    )
    return models.ClusterResponse(**asdict(out))


def graph(req: models.GraphRequest) -> models.GraphResponse:
    out = stages.stage_graph(req.corpus, req.vocab, req.time_model, req.space_model, req.output)
    return models.GraphResponse(**asdict(out))


def walk(req: models.WalkRequest) -> models.WalkResponse:
    out = stages.stage_walk(
        req.graph,
        req.output,
        metapath=req.metapath,
        num_walks=req.num_walks,
        walk_length=req.walk_length,
        seed=req.seed,
        workers=req.workers,
    )
    return models.WalkResponse(**asdict(out))


def embed(req: models.EmbedRequest) -> models.EmbedResponse:
    out = stages.stage_embed(
        req.walks,
        req.output,
        dim=req.dim,
        window=req.window,
        negatives=req.negatives,
        epochs=req.epochs,
        learning_rate=req.learning_rate,
        seed=req.seed,
        workers=req.workers,
    )
    return models.EmbedResponse(**asdict(out))


def query(req: models.QueryRequest) -> models.QueryResponse:
    out = stages.stage_query(
        req.embeddings,
        word=req.word,
        timestamp=req.time,
        latlon=req.latlon,
        k=req.k,
        vocab_path=req.vocab,
        time_model_path=req.time_model,
        space_model_path=req.space_model,
        geojson_out=req.geojson,
    )
    return models.QueryResponse(
        query=out.query,
        results={t: [models.QueryHitModel(**asdict(h)) for h in hits] for t, hits in out.results.items()},
        geojson_path=out.geojson_path,
    )


def eval_(req: models.EvalRequest) -> models.EvalResponse:
    out = stages.stage_eval(
        req.test_corpus,
        req.embeddings,
        req.vocab,
        req.time_model,
        req.space_model,
        k_eval=req.k_eval,
    )
    return models.EvalResponse(**asdict(out))


def pipeline(req: models.PipelineRequest) -> models.PipelineResponse:
    out = stages.stage_pipeline(
        req.corpus,
        req.workdir,
        stopwords=req.stopwords,
        vocab_k=req.vocab_k,
        min_freq=req.min_freq,
        loc_bandwidth=req.loc_bandwidth,
        time_bandwidth=req.time_bandwidth,
        time_mapping=req.time_mapping,
        metapath=req.metapath,
        num_walks=req.num_walks,
        walk_length=req.walk_length,
        dim=req.dim,
        window=req.window,
        negatives=req.negatives,
        epochs=req.epochs,
        learning_rate=req.learning_rate,
        seed=req.seed,
        workers=req.workers,
    )
    return models.PipelineResponse(
        files=out.files,
        vocab=models.VocabResponse(**asdict(out.vocab)),
        time_clusters=models.ClusterResponse(**asdict(out.time_clusters)),
        space_clusters=models.ClusterResponse(**asdict(out.space_clusters)),
        graph=models.GraphResponse(**asdict(out.graph)),
        walks=models.WalkResponse(**asdict(out.walks)),
        embeddings=models.EmbedResponse(**asdict(out.embeddings)),
        seconds=out.seconds,
    )


ENDPOINTS = {
    "vocab": (vocab, models.VocabRequest, models.VocabResponse),
    "cluster": (cluster, models.ClusterRequest, models.ClusterResponse),
    "graph": (graph, models.GraphRequest, models.GraphResponse),
    "walk": (walk, models.WalkRequest, models.WalkResponse),
    "embed": (embed, models.EmbedRequest, models.EmbedResponse),
    "query": (query, models.QueryRequest, models.QueryResponse),
    "eval": (eval_, models.EvalRequest, models.EvalResponse),
    "pipeline": (pipeline, models.PipelineRequest, models.PipelineResponse),
}
