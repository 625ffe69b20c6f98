"""Cross-modal query resolution, nearest-neighbor ranking, and MRR scoring."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .cluster import ClusterModel, assign, map_time
from .embed import EmbeddingTable
from .errors import (
    DegenerateVectorError,
    EmptyDataError,
    ModelRequiredError,
    OutOfVocabularyError,
    UntrainedNodeError,
)
from .hetnet import ClusteredRecord, Node
from .ingest import Vocabulary


@dataclass(frozen=True)
class Query:
    """Exactly one of word, timestamp, or latlon, plus the per-type result count."""

    word: str | None = None
    timestamp: int | None = None
    latlon: tuple[float, float] | None = None
    k: int = 10

    def __post_init__(self):
        given = sum(x is not None for x in (self.word, self.timestamp, self.latlon))
        if given != 1:
            raise ValueError("exactly one of word, timestamp, or latlon must be set")
        if self.k < 0:
            raise ValueError("k must be >= 0")


def resolve(
    q: Query,
    time_model: ClusterModel | None,
    space_model: ClusterModel | None,
    vocab: Vocabulary | None,
    table: EmbeddingTable,
) -> Node:
    """Map a raw query to its graph node: word, assigned T cluster, or assigned L cluster."""
    if q.word is not None:
        if vocab is None or q.word not in vocab:
            raise OutOfVocabularyError(q.word)
        node = Node("W", q.word)
    elif q.timestamp is not None:
        if time_model is None:
            raise ModelRequiredError("time queries need a time cluster model")
        mapped = float(map_time(q.timestamp, time_model.time_mapping or "absolute"))
        node = Node("T", assign(np.array([mapped]), time_model))
    else:
        if space_model is None:
            raise ModelRequiredError("location queries need a space cluster model")
        node = Node("L", assign(np.array(q.latlon, dtype=float), space_model))
    if node not in table:
        raise UntrainedNodeError(node.render())
    return node


def nearest(
    table: EmbeddingTable,
    u: Node,
    node_type: str,
    k: int,
) -> list[tuple[Node, float]]:
    """Top-k nodes of one type by cosine similarity of input vectors.

    The query node is excluded from its own type's list; ties break by
    ascending node key.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    u_row = table.row(u)
    x = table.vectors[u_row]
    x_norm = float(np.linalg.norm(x))
    if x_norm == 0.0:
        raise DegenerateVectorError(u.render())
    rows = table.type_rows(node_type)
    rows = rows[rows != u_row]
    if k == 0 or len(rows) == 0:
        return []
    mat = table.vectors[rows]
    norms = np.linalg.norm(mat, axis=1)
    sims = (mat @ x) / (np.where(norms > 0, norms, 1.0) * x_norm)
    order = sorted(range(len(rows)), key=lambda i: (-sims[i], table.nodes[rows[i]].key))
    return [(table.nodes[rows[i]], float(sims[i])) for i in order[:k]]


def reciprocal_rank(results: Sequence, truth: Node) -> float:
    """1 / (1-based position of truth), or 0.0 when truth is absent."""
    for pos, item in enumerate(results, 1):
        node = item if isinstance(item, Node) else item[0]
        if node == truth:
            return 1.0 / pos
    return 0.0


@dataclass(frozen=True)
class EvalPair:
    query: Node
    truth: Node
    target_type: str
    weight: int = 1


def build_eval_set(records: Iterable[ClusteredRecord]) -> list[EvalPair]:
    """Query/truth pairs from held-out records.

    Each keyword is queried against its record's location cluster (location
    retrieval) and against every co-occurring keyword (text retrieval).
    Duplicate pairs collapse with their multiplicity kept as a weight.
    """
    counts: Counter[tuple[Node, Node, str]] = Counter()
    for rec in records:
        words = sorted(set(rec.keywords))
        for w in words:
            counts[(Node("W", w), Node("L", rec.loc_cluster), "L")] += 1
            for w2 in words:
                if w2 != w:
                    counts[(Node("W", w), Node("W", w2), "W")] += 1
    pairs = [EvalPair(q, t, tt, c) for (q, t, tt), c in counts.items()]
    pairs.sort(key=lambda p: (p.target_type, p.query, p.truth))
    return pairs


@dataclass(frozen=True)
class MrrResult:
    overall: float
    by_type: dict[str, float]
    queries: int  # weighted count of scored queries
    skipped: int  # weighted count of pairs whose query node is untrained


def mrr(
    eval_set: Sequence[EvalPair],
    table: EmbeddingTable,
    k_eval: int | None = None,
) -> MrrResult:
    """Mean reciprocal rank over the eval set.

    By default every query ranks the full population of the target type, so
    any retrievable truth has a finite rank; with an explicit k_eval cutoff a
    truth outside the top k scores 0.
    """
    pairs = list(eval_set)
    if not pairs:
        raise EmptyDataError("empty evaluation set")
    num = 0.0
    den = 0
    per_num: dict[str, float] = defaultdict(float)
    per_den: dict[str, int] = defaultdict(int)
    skipped = 0
    for p in pairs:
        if p.query not in table:
            skipped += p.weight
            continue
        k = len(table.type_rows(p.target_type)) if k_eval is None else k_eval
        ranked = nearest(table, p.query, p.target_type, k)
        rr = reciprocal_rank(ranked, p.truth)
        num += p.weight * rr
        den += p.weight
        per_num[p.target_type] += p.weight * rr
        per_den[p.target_type] += p.weight
    if den == 0:
        raise EmptyDataError("no scorable queries (all query nodes untrained)")
    by_type = {t: per_num[t] / per_den[t] for t in sorted(per_den)}
    return MrrResult(num / den, by_type, den, skipped)


def location_geojson(
    results: Sequence[tuple[Node, float]],
    model: ClusterModel,
    query_label: str = "",
) -> dict:
    """GeoJSON FeatureCollection of ranked location-cluster results."""
    features = []
    for rank, (node, score) in enumerate(results, 1):
        idx = int(node.key)
        lat, lon = (float(c) for c in model.modes[idx])
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [lon, lat]},
                "properties": {
                    "cluster": idx,
                    "rank": rank,
                    "score": float(score),
                    "population": int(model.populations[idx]),
                },
            }
        )
    out = {"type": "FeatureCollection", "features": features}
    if query_label:
        out["properties"] = {"query": query_label}
    return out
