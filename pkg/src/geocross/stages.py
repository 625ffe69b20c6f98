"""File-to-file pipeline stages shared by the HTTP service and the CLI.

Each stage reads the previous stage's artifact files and writes its own, so
runs are resumable and every stage is independently testable. Artifact file
names used by the chained pipeline live in PIPELINE_FILES.
"""

from __future__ import annotations

import json
import logging
import time
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import artifacts, cluster, embed, hetnet, ingest, walker
from . import query as querying
from .errors import EmptyDataError, ModelRequiredError
from .hetnet import ClusteredRecord, Node

logger = logging.getLogger(__name__)

PIPELINE_FILES = {
    "vocab": "vocab.tsv",
    "time_model": "time_clusters.txt",
    "space_model": "space_clusters.txt",
    "graph": "graph.tsv",
    "walks": "walks.txt",
    "embeddings": "embeddings.txt",
}


@dataclass(frozen=True)
class VocabOutcome:
    words: int
    records: int
    rejected: dict[str, int]
    path: str


@dataclass(frozen=True)
class ClusterOutcome:
    modality: str
    modes: int
    points: int
    rejected: dict[str, int]
    path: str


@dataclass(frozen=True)
class GraphOutcome:
    nodes: dict[str, int]
    edges: int
    total_weight: int
    records: int
    path: str


@dataclass(frozen=True)
class WalkOutcome:
    walks: int
    start_nodes: int
    attempted: int
    path: str


@dataclass(frozen=True)
class EmbedOutcome:
    nodes: int
    dim: int
    walks: int
    path: str


@dataclass(frozen=True)
class QueryHit:
    node: str
    score: float
    center: list[float] | None = None
    label: str | None = None


@dataclass(frozen=True)
class QueryOutcome:
    query: str
    results: dict[str, list[QueryHit]]
    geojson_path: str | None = None


@dataclass(frozen=True)
class EvalOutcome:
    text_mrr: float | None
    location_mrr: float | None
    overall_mrr: float
    queries: int
    skipped: int


@dataclass(frozen=True)
class PipelineOutcome:
    files: dict[str, str]
    vocab: VocabOutcome
    time_clusters: ClusterOutcome
    space_clusters: ClusterOutcome
    graph: GraphOutcome
    walks: WalkOutcome
    embeddings: EmbedOutcome
    seconds: float


def _load_stopwords(path: str | Path | None) -> frozenset[str]:
    return ingest.read_stopwords(path) if path else frozenset()


def stage_vocab(
    corpus: str | Path,
    out: str | Path,
    stopwords: str | Path | None = None,
    k: int = 20000,
    min_freq: int = 100,
) -> VocabOutcome:
    stop = _load_stopwords(stopwords)
    rejects: Counter[str] = Counter()
    seen = 0

    def counted():
        nonlocal seen
        for rec in ingest.iter_records(corpus, stop, rejects):
            seen += 1
            yield rec

    vocab = ingest.build_vocabulary(counted(), k=k, stopwords=stop, min_freq=min_freq)
    artifacts.write_vocab(vocab, out)
    if rejects:
        logger.info("vocab: rejected %d malformed lines (%s)", sum(rejects.values()), dict(rejects))
    return VocabOutcome(len(vocab), seen, dict(rejects), str(out))


def stage_cluster(
    corpus: str | Path,
    out: str | Path,
    modality: str,
    bandwidth: float,
    time_mapping: str = "day",
    tol: float | None = None,
    max_iter: int = 200,
    merge_radius: float | None = None,
    cell_size: float | None = None,
) -> ClusterOutcome:
    if modality not in ("time", "space"):
        raise ValueError(f"modality must be 'time' or 'space', got {modality!r}")
    rejects: Counter[str] = Counter()
    if modality == "time":
        values = [r.timestamp for r in ingest.iter_records(corpus, (), rejects)]
        points = cluster.map_time(np.array(values, dtype=float), time_mapping)
        cfg = cluster.KernelConfig(h=bandwidth, d=1)
        mapping = time_mapping
    else:
        values = [(r.lat, r.lon) for r in ingest.iter_records(corpus, (), rejects)]
        points = np.array(values, dtype=float).reshape(len(values), 2)
        cfg = cluster.KernelConfig(h=bandwidth, d=2)
        mapping = None
    if len(points) == 0:
        raise EmptyDataError(f"no valid records in {corpus}")
    model = cluster.find_modes(
        points,
        cfg,
        tol=tol,
        max_iter=max_iter,
        merge_radius=merge_radius,
        cell_size=cell_size,
        modality=modality,
        time_mapping=mapping,
    )
    artifacts.write_cluster_model(model, out)
    return ClusterOutcome(modality, len(model), len(points), dict(rejects), str(out))


def _clustered_records(
    corpus: str | Path,
    vocab: ingest.Vocabulary,
    time_model: cluster.ClusterModel,
    space_model: cluster.ClusterModel,
    rejects: Counter[str] | None = None,
) -> list[ClusteredRecord]:
    records = [
        ingest.restrict_record(r, vocab) for r in ingest.iter_records(corpus, (), rejects)
    ]
    if not records:
        return []
    times = cluster.map_time(
        np.array([r.timestamp for r in records], dtype=float),
        time_model.time_mapping or "absolute",
    )
    t_idx = cluster.assign_points(times, time_model)
    coords = np.array([(r.lat, r.lon) for r in records], dtype=float)
    l_idx = cluster.assign_points(coords, space_model)
    return [
        ClusteredRecord(int(t_idx[i]), int(l_idx[i]), records[i].keywords or ())
        for i in range(len(records))
    ]


def stage_graph(
    corpus: str | Path,
    vocab_path: str | Path,
    time_model_path: str | Path,
    space_model_path: str | Path,
    out: str | Path,
) -> GraphOutcome:
    vocab = artifacts.read_vocab(vocab_path)
    time_model = artifacts.read_cluster_model(time_model_path)
    space_model = artifacts.read_cluster_model(space_model_path)
    rejects: Counter[str] = Counter()
    clustered = _clustered_records(corpus, vocab, time_model, space_model, rejects)
    g = hetnet.build_network(clustered)
    artifacts.write_graph(g, out)
    nodes = {t: len(g.nodes_of_type(t)) for t in hetnet.NODE_TYPES}
    return GraphOutcome(nodes, g.num_edges, g.total_weight, len(clustered), str(out))


def stage_walk(
    graph_path: str | Path,
    out: str | Path,
    metapath: str = walker.DEFAULT_METAPATH,
    num_walks: int = 30,
    walk_length: int = 50,
    seed: int = 1,
    workers: int = 1,
) -> WalkOutcome:
    g = artifacts.read_graph(graph_path)
    mp = walker.Metapath.parse(metapath)
    corpus = walker.generate_corpus(
        g, mp, num_walks=num_walks, walk_length=walk_length, seed=seed, workers=workers
    )
    artifacts.write_walks(corpus, out)
    starts = len(g.nodes_of_type(mp.types[0]))
    return WalkOutcome(len(corpus), starts, starts * num_walks, str(out))


def stage_embed(
    walks_path: str | Path,
    out: str | Path,
    dim: int = 300,
    window: int = 7,
    negatives: int = 5,
    epochs: int = 5,
    learning_rate: float = 0.025,
    seed: int = 1,
    workers: int = 1,
) -> EmbedOutcome:
    corpus = artifacts.read_walks(walks_path)
    cfg = embed.TrainConfig(
        dim=dim,
        window=window,
        negatives=negatives,
        epochs=epochs,
        learning_rate=learning_rate,
        seed=seed,
        workers=workers,
    )
    table = embed.train(corpus, cfg)
    artifacts.write_embeddings(table, out)
    return EmbedOutcome(len(table), table.dim, len(corpus), str(out))


def _time_label(seconds: float, mapping: str | None) -> str:
    if mapping in ("day", "week"):
        total = int(round(seconds))
        if mapping == "week":
            day, rem = divmod(total, 86400)
            return f"day{day}+{rem // 3600:02d}:{rem % 3600 // 60:02d}:{rem % 60:02d}"
        return f"{total // 3600:02d}:{total % 3600 // 60:02d}:{total % 60:02d}"
    return f"{seconds:.0f}s"


def _decorate(
    hits: list[tuple[Node, float]],
    time_model: cluster.ClusterModel | None,
    space_model: cluster.ClusterModel | None,
) -> list[QueryHit]:
    out = []
    for node, score in hits:
        center = None
        label = None
        if node.type == "L" and space_model is not None and int(node.key) < len(space_model):
            center = [float(c) for c in space_model.modes[int(node.key)]]
            label = f"{center[0]:.4f},{center[1]:.4f}"
        elif node.type == "T" and time_model is not None and int(node.key) < len(time_model):
            center = [float(time_model.modes[int(node.key)][0])]
            label = _time_label(center[0], time_model.time_mapping)
        elif node.type == "W":
            label = str(node.key)
        out.append(QueryHit(node.render(), score, center, label))
    return out


def stage_query(
    embeddings_path: str | Path,
    word: str | None = None,
    timestamp: int | None = None,
    latlon: tuple[float, float] | None = None,
    k: int = 10,
    vocab_path: str | Path | None = None,
    time_model_path: str | Path | None = None,
    space_model_path: str | Path | None = None,
    geojson_out: str | Path | None = None,
) -> QueryOutcome:
    table = artifacts.read_embeddings(embeddings_path)
    vocab = artifacts.read_vocab(vocab_path) if vocab_path else None
    time_model = artifacts.read_cluster_model(time_model_path) if time_model_path else None
    space_model = artifacts.read_cluster_model(space_model_path) if space_model_path else None
    q = querying.Query(word=word, timestamp=timestamp, latlon=latlon, k=k)
    node = querying.resolve(q, time_model, space_model, vocab, table)
    results = {}
    for t in hetnet.NODE_TYPES:
        results[t] = _decorate(querying.nearest(table, node, t, k), time_model, space_model)
    geojson_path = None
    if geojson_out is not None:
        if space_model is None:
            raise ModelRequiredError("GeoJSON export needs a space cluster model")
        ranked = [(Node("L", int(h.node.split(":", 1)[1])), h.score) for h in results["L"]]
        collection = querying.location_geojson(ranked, space_model, query_label=node.render())
        Path(geojson_out).write_text(json.dumps(collection, indent=2) + "\n", encoding="utf-8")
        geojson_path = str(geojson_out)
    return QueryOutcome(node.render(), results, geojson_path)


def stage_eval(
    test_corpus: str | Path,
    embeddings_path: str | Path,
    vocab_path: str | Path,
    time_model_path: str | Path,
    space_model_path: str | Path,
    k_eval: int | None = None,
) -> EvalOutcome:
    table = artifacts.read_embeddings(embeddings_path)
    vocab = artifacts.read_vocab(vocab_path)
    time_model = artifacts.read_cluster_model(time_model_path)
    space_model = artifacts.read_cluster_model(space_model_path)
    rejects: Counter[str] = Counter()
    clustered = _clustered_records(test_corpus, vocab, time_model, space_model, rejects)
    eval_set = querying.build_eval_set(clustered)
    if not eval_set:
        raise EmptyDataError(f"no evaluation pairs could be built from {test_corpus}")
    result = querying.mrr(eval_set, table, k_eval=k_eval)
    return EvalOutcome(
        text_mrr=result.by_type.get("W"),
        location_mrr=result.by_type.get("L"),
        overall_mrr=result.overall,
        queries=result.queries,
        skipped=result.skipped,
    )


def stage_pipeline(
    corpus: str | Path,
    workdir: str | Path,
    stopwords: str | Path | None = None,
    vocab_k: int = 20000,
    min_freq: int = 100,
    loc_bandwidth: float = 0.05,
    time_bandwidth: float = 1000.0,
    time_mapping: str = "day",
    metapath: str = walker.DEFAULT_METAPATH,
    num_walks: int = 30,
    walk_length: int = 50,
    dim: int = 300,
    window: int = 7,
    negatives: int = 5,
    epochs: int = 5,
    learning_rate: float = 0.025,
    seed: int = 1,
    workers: int = 1,
) -> PipelineOutcome:
    """Run every artifact stage in order inside workdir."""
    started = time.perf_counter()
    wd = Path(workdir)
    wd.mkdir(parents=True, exist_ok=True)
    files = {name: str(wd / fname) for name, fname in PIPELINE_FILES.items()}

    vocab_out = stage_vocab(corpus, files["vocab"], stopwords, k=vocab_k, min_freq=min_freq)
    time_out = stage_cluster(
        corpus, files["time_model"], "time", time_bandwidth, time_mapping=time_mapping
    )
    space_out = stage_cluster(corpus, files["space_model"], "space", loc_bandwidth)
    graph_out = stage_graph(
        corpus, files["vocab"], files["time_model"], files["space_model"], files["graph"]
    )
    walk_out = stage_walk(
        files["graph"],
        files["walks"],
        metapath=metapath,
        num_walks=num_walks,
        walk_length=walk_length,
        seed=seed,
        workers=workers,
    )
    embed_out = stage_embed(
        files["walks"],
        files["embeddings"],
        dim=dim,
        window=window,
        negatives=negatives,
        epochs=epochs,
        learning_rate=learning_rate,
        seed=seed,
        workers=workers,
    )
    return PipelineOutcome(
        files=files,
        vocab=vocab_out,
        time_clusters=time_out,
        space_clusters=space_out,
        graph=graph_out,
        walks=walk_out,
        embeddings=embed_out,
        seconds=time.perf_counter() - started,
    )
