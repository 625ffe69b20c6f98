"""Type-aware skip-gram embeddings trained with heterogeneous negative sampling.

Each node owns two parameter banks: an input (center) vector and an output
(context) vector. The training objective for a (center v, context c) pair with
negatives u_1..u_M of the context's type is

    O = log sigma(X'_c . X_v) + sum_m log sigma(-X'_um . X_v)

maximized by per-pair stochastic gradient ascent. Negatives are drawn from a
per-type unigram^0.75 distribution over the walk corpus, so the softmax that O
approximates is normalized within the context's node type. The input bank is
what gets exposed as the node embedding.
"""

from __future__ import annotations

import ctypes
import logging
import multiprocessing
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyDataError, UnknownNodeError
from .hetnet import NODE_TYPES, Node

logger = logging.getLogger(__name__)

NEGATIVE_POWER = 0.75
NEGATIVE_RESAMPLE_TRIES = 100
LR_FLOOR_FRACTION = 0.01  # final learning rate = initial / 100

_TYPE_CODE = {t: i for i, t in enumerate(NODE_TYPES)}


@dataclass(frozen=True)
class TrainConfig:
    dim: int = 300
    window: int = 7
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    seed: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.dim < 1 or self.window < 1 or self.negatives < 1 or self.epochs < 1:
            raise ValueError("dim, window, negatives, and epochs must all be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


class EmbeddingTable:
    """Dense vectors keyed by node: ``vectors`` is the input bank X_v,
    ``contexts`` the output bank X'_v."""

    def __init__(self, nodes: Sequence[Node], vectors: np.ndarray, contexts: np.ndarray):
        self.nodes: tuple[Node, ...] = tuple(nodes)
        self.vectors = np.asarray(vectors, dtype=float)
        self.contexts = np.asarray(contexts, dtype=float)
        if self.vectors.shape != self.contexts.shape or self.vectors.ndim != 2:
            raise ValueError("vector banks must share one (N, d) shape")
        if len(self.nodes) != self.vectors.shape[0]:
            raise ValueError("node count does not match vector rows")
        self.index: dict[Node, int] = {n: i for i, n in enumerate(self.nodes)}
        if len(self.index) != len(self.nodes):
            raise ValueError("duplicate nodes")
        self._type_rows = {
            t: np.fromiter(
                (i for i, n in enumerate(self.nodes) if n.type == t), np.int64
            )
            for t in NODE_TYPES
        }

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node: Node) -> bool:
        return node in self.index

    def row(self, node: Node) -> int:
        try:
            return self.index[node]
        except KeyError:
            raise UnknownNodeError(node.render()) from None

    def vector(self, node: Node) -> np.ndarray:
        return self.vectors[self.row(node)]

    def type_rows(self, node_type: str) -> np.ndarray:
        return self._type_rows.get(node_type, np.zeros(0, np.int64))

    def nodes_of_type(self, node_type: str) -> list[Node]:
        return [self.nodes[i] for i in self.type_rows(node_type)]


def init_embeddings(nodes: Iterable[Node], d: int, seed: int) -> EmbeddingTable:
    """Input vectors i.i.d. uniform in [-0.5/d, 0.5/d), output vectors zero."""
    if d < 1:
        raise ValueError("d must be >= 1")
    ordered = sorted(set(nodes))
    if not ordered:
        raise EmptyDataError("no nodes to embed")
    rng = np.random.default_rng(seed)
    vectors = rng.uniform(-0.5 / d, 0.5 / d, size=(len(ordered), d))
    return EmbeddingTable(ordered, vectors, np.zeros((len(ordered), d)))


def skipgram_pairs(walk: Sequence[Node], window: int) -> list[tuple[Node, Node]]:
    """(center, context) pairs for every position pair within the window."""
    if window < 1:
        raise ValueError("window must be >= 1")
    n = len(walk)
    out = []
    for i in range(n):
        for j in range(max(0, i - window), min(n, i + window + 1)):
            if j != i:
                out.append((walk[i], walk[j]))
    return out


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # Floor at -60 keeps exp() in range; sigmoid(-60) ~ 9e-27 is exact enough.
    return 1.0 / (1.0 + np.exp(-np.maximum(np.asarray(z, dtype=float), -60.0)))


def _log_sigmoid(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return np.minimum(z, 0.0) - np.log1p(np.exp(-np.abs(z)))


def type_softmax_prob(
    table: EmbeddingTable,
    v: Node,
    c: Node,
    candidates: Sequence[Node] | None = None,
) -> float:
    """Softmax of X'_c . X_v normalized over the context's own node type.

    Used for tests and desk-scale oracles; training approximates this with
    negative sampling.
    """
    rows = (
        table.type_rows(c.type)
        if candidates is None
        else np.fromiter((table.row(u) for u in candidates), np.int64)
    )
    c_row = table.row(c)
    where = np.flatnonzero(rows == c_row)
    if len(where) == 0:
        raise ValueError("context node is not among the candidates")
    x = table.vectors[table.row(v)]
    scores = table.contexts[rows] @ x
    scores = scores - scores.max()
    e = np.exp(scores)
    return float(e[where[0]] / e.sum())


def pair_objective(
    table: EmbeddingTable,
    v: Node,
    c: Node,
    negatives: Sequence[Node],
) -> float:
    """Negative-sampling objective O for one (center, context) pair."""
    x = table.vectors[table.row(v)]
    pos = float(table.contexts[table.row(c)] @ x)
    obj = float(_log_sigmoid(np.array([pos]))[0])
    if negatives:
        rows = np.fromiter((table.row(u) for u in negatives), np.int64)
        obj += float(_log_sigmoid(-(table.contexts[rows] @ x)).sum())
    return obj


def _sgd_rows(
    vectors: np.ndarray,
    contexts: np.ndarray,
    v_row: int,
    rows: np.ndarray,
    labels: np.ndarray,
    lr: float,
) -> None:
    """Gradient-ascent update shared by sgd_step and the training loop.

    Output rows are read once up front so the input-bank update uses the
    pre-step context vectors; np.add.at accumulates repeated rows exactly.
    """
    x = vectors[v_row]
    old = contexts[rows]  # fancy indexing copies
    coef = (labels - _sigmoid(old @ x)) * lr
    np.add.at(contexts, rows, coef[:, None] * x)
    vectors[v_row] = x + coef @ old


def sgd_step(
    table: EmbeddingTable,
    v: Node,
    c: Node,
    negatives: Sequence[Node],
    lr: float,
) -> None:
    """One in-place ascent step of pair_objective's gradient."""
    if lr < 0:
        raise ValueError("learning rate must be non-negative")
    rows = np.fromiter((table.row(u) for u in (c, *negatives)), np.int64)
    labels = np.zeros(len(rows))
    labels[0] = 1.0
    _sgd_rows(table.vectors, table.contexts, table.row(v), rows, labels, lr)


class NegativeSampler:
    """Per-type cumulative table with probability proportional to corpus
    frequency raised to 0.75; sampling from a type only returns that type."""

    def __init__(self, rows_by_type: dict[str, np.ndarray], weights_by_type: dict[str, np.ndarray]):
        self._rows: dict[str, np.ndarray] = {}
        self._cum: dict[str, np.ndarray] = {}
        self._probs: dict[str, np.ndarray] = {}
        for t, rows in rows_by_type.items():
            w = np.asarray(weights_by_type[t], dtype=float)
            keep = w > 0
            if not keep.any():
                continue
            rows = np.asarray(rows, np.int64)[keep]
            w = w[keep]
            self._rows[t] = rows
            self._cum[t] = np.cumsum(w)
            self._probs[t] = w / w.sum()

    @classmethod
    def from_corpus(
        cls,
        corpus: Iterable[Sequence[Node]],
        table: EmbeddingTable,
        power: float = NEGATIVE_POWER,
    ) -> "NegativeSampler":
        counts: Counter[Node] = Counter(n for walk in corpus for n in walk)
        rows_by_type = {}
        weights_by_type = {}
        for t in NODE_TYPES:
            rows = table.type_rows(t)
            rows_by_type[t] = rows
            weights_by_type[t] = np.array(
                [counts.get(table.nodes[r], 0) for r in rows], dtype=float
            ) ** power
        return cls(rows_by_type, weights_by_type)

    def probabilities(self, node_type: str) -> tuple[np.ndarray, np.ndarray]:
        """(table rows, probabilities) for one type; probabilities sum to 1."""
        if node_type not in self._probs:
            raise EmptyDataError(f"no sampling mass for type {node_type}")
        return self._rows[node_type], self._probs[node_type]

    def sample(self, node_type: str, rng: np.random.Generator, size) -> np.ndarray:
        """Draw table rows of one type; shape follows ``size``."""
        cum = self._cum.get(node_type)
        if cum is None:
            raise EmptyDataError(f"no sampling mass for type {node_type}")
        u = rng.random(size) * cum[-1]
        return self._rows[node_type][np.searchsorted(cum, u, side="right")]


_PAIR_CACHE: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}


def _pair_indices(n: int, window: int) -> tuple[np.ndarray, np.ndarray]:
    key = (n, window)
    hit = _PAIR_CACHE.get(key)
    if hit is None:
        ci, cj = [], []
        for i in range(n):
            for j in range(max(0, i - window), min(n, i + window + 1)):
                if j != i:
                    ci.append(i)
                    cj.append(j)
        hit = (np.array(ci, np.int64), np.array(cj, np.int64))
        _PAIR_CACHE[key] = hit
    return hit


def _draw_negatives(
    sampler: NegativeSampler,
    ctx_rows: np.ndarray,
    ctr_rows: np.ndarray,
    ctx_codes: np.ndarray,
    m: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """(P, M) negative rows per pair, resampled up to NEGATIVE_RESAMPLE_TRIES
    on collision and then marked -1 (skipped).

    Both the true context and the center are excluded: with the tiny per-type
    populations of cluster nodes, a center drawn as its own negative is common
    enough to anti-align nodes with themselves and corrupt rankings.
    """
    out = np.empty((len(ctx_rows), m), np.int64)
    for code, tname in enumerate(NODE_TYPES):
        mask = ctx_codes == code
        if mask.any():
            out[mask] = sampler.sample(tname, rng, (int(mask.sum()), m))
    truth = ctx_rows[:, None]
    center = ctr_rows[:, None]
    for _ in range(NEGATIVE_RESAMPLE_TRIES):
        bad = (out == truth) | (out == center)
        if not bad.any():
            break
        for code, tname in enumerate(NODE_TYPES):
            bm = bad & (ctx_codes[:, None] == code)
            if bm.any():
                out[bm] = sampler.sample(tname, rng, int(bm.sum()))
    out[(out == truth) | (out == center)] = -1
    return out


def _train_pass(
    vectors: np.ndarray,
    contexts: np.ndarray,
    walk_rows: Sequence[np.ndarray],
    walk_codes: Sequence[np.ndarray],
    sampler: NegativeSampler,
    cfg: TrainConfig,
    rng: np.random.Generator,
    total_pairs: int,
    done_start: int = 0,
    stride: int = 1,
) -> int:
    """Run cfg.epochs of pair updates over the given walks; returns pairs seen.

    ``done_start``/``stride`` position this pass inside the global learning
    rate schedule (hogwild workers interleave their local counters).
    """
    lr0 = cfg.learning_rate
    m = cfg.negatives
    labels_full = np.zeros(m + 1)
    labels_full[0] = 1.0
    rows_buf = np.empty(m + 1, np.int64)
    decay = (1.0 - LR_FLOOR_FRACTION) / max(total_pairs, 1)
    done = 0
    for _ in range(cfg.epochs):
        for rows, codes in zip(walk_rows, walk_codes):
            ci, cj = _pair_indices(len(rows), cfg.window)
            centers = rows[ci]
            ctxs = rows[cj]
            negs = _draw_negatives(sampler, ctxs, centers, codes[cj], m, rng)
            any_skip = bool((negs < 0).any())
            for p in range(len(centers)):
                lr = lr0 * (1.0 - decay * min(done_start + done * stride, total_pairs))
                done += 1
                neg_rows = negs[p]
                if not any_skip or neg_rows.min() >= 0:
                    rows_buf[0] = ctxs[p]
                    rows_buf[1:] = neg_rows
                    _sgd_rows(vectors, contexts, centers[p], rows_buf, labels_full, lr)
                else:
                    kept = neg_rows[neg_rows >= 0]
                    rows_p = np.concatenate(([ctxs[p]], kept))
                    labels = np.zeros(len(rows_p))
                    labels[0] = 1.0
                    _sgd_rows(vectors, contexts, centers[p], rows_p, labels, lr)
    return done


_HOGWILD_STATE: dict = {}


def _hogwild_worker(worker_id: int) -> None:
    s = _HOGWILD_STATE
    cfg: TrainConfig = s["cfg"]
    n, d = s["shape"]
    vectors = np.frombuffer(s["vec_buf"]).reshape(n, d)
    contexts = np.frombuffer(s["ctx_buf"]).reshape(n, d)
    rows = s["walk_rows"][worker_id :: cfg.workers]
    codes = s["walk_codes"][worker_id :: cfg.workers]
    rng = np.random.default_rng([cfg.seed, 2, worker_id])
    _train_pass(
        vectors,
        contexts,
        rows,
        codes,
        s["sampler"],
        cfg,
        rng,
        s["total_pairs"],
        done_start=worker_id,
        stride=cfg.workers,
    )


def train(corpus: Iterable[Sequence[Node]], cfg: TrainConfig) -> EmbeddingTable:
    """Train embeddings over a walk corpus.

    Deterministic for workers=1 and a fixed seed. With workers > 1 the walks
    are split across forked processes updating shared parameter banks without
    locks; lost updates are tolerated and results are only statistically
    reproducible.
    """
    walks = [w for w in corpus if len(w) >= 2]
    if not walks:
        raise EmptyDataError("empty walk corpus")
    nodes = sorted({n for w in walks for n in w})
    table = init_embeddings(nodes, cfg.dim, cfg.seed)
    sampler = NegativeSampler.from_corpus(walks, table)
    walk_rows = [np.fromiter((table.index[n] for n in w), np.int64, len(w)) for w in walks]
    walk_codes = [np.fromiter((_TYPE_CODE[n.type] for n in w), np.int64, len(w)) for w in walks]
    pairs_per_epoch = sum(len(_pair_indices(len(r), cfg.window)[0]) for r in walk_rows)
    total_pairs = cfg.epochs * pairs_per_epoch
    if total_pairs == 0:
        raise EmptyDataError("no skip-gram pairs in the corpus")

    if cfg.workers <= 1:
        rng = np.random.default_rng([cfg.seed, 1])
        _train_pass(
            table.vectors, table.contexts, walk_rows, walk_codes, sampler, cfg, rng, total_pairs
        )
        return table

    ctx = multiprocessing.get_context("fork")
    n, d = table.vectors.shape
    vec_buf = ctx.RawArray(ctypes.c_double, n * d)
    ctx_buf = ctx.RawArray(ctypes.c_double, n * d)
    np.frombuffer(vec_buf).reshape(n, d)[:] = table.vectors
    np.frombuffer(ctx_buf).reshape(n, d)[:] = table.contexts
    _HOGWILD_STATE.update(
        cfg=cfg,
        shape=(n, d),
        vec_buf=vec_buf,
        ctx_buf=ctx_buf,
        walk_rows=walk_rows,
        walk_codes=walk_codes,
        sampler=sampler,
        total_pairs=total_pairs,
    )
    try:
        procs = [ctx.Process(target=_hogwild_worker, args=(w,)) for w in range(cfg.workers)]
        for p in procs:
            p.start()
        for p in procs:
            p.join()
        failed = [p.exitcode for p in procs if p.exitcode != 0]
        if failed:
            raise RuntimeError(f"hogwild training workers failed with exit codes {failed}")
    finally:
        _HOGWILD_STATE.clear()
    table.vectors[:] = np.frombuffer(vec_buf).reshape(n, d)
    table.contexts[:] = np.frombuffer(ctx_buf).reshape(n, d)
    return table
