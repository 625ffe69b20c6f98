"""Metapath-guided weighted random walks over the heterogeneous graph."""

from __future__ import annotations

import random
from bisect import bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import accumulate
from typing import Sequence

from .errors import EmptyDataError, UnknownNodeError
from .hetnet import NODE_TYPES, HetGraph, Node

DEFAULT_METAPATH = "W-W-L-W-W"
TIME_LINKED_METAPATH = "W-W-L-T-L-W-W"


@dataclass(frozen=True)
class Metapath:
    """Ordered node-type schedule, e.g. W-W-L-W-W."""

    types: tuple[str, ...]

    def __post_init__(self):
        if len(self.types) < 2:
            raise ValueError("a metapath needs at least two types")
        bad = [t for t in self.types if t not in NODE_TYPES]
        if bad:
            raise ValueError(f"unknown node types in metapath: {bad}")

    @classmethod
    def parse(cls, text: str) -> "Metapath":
        return cls(tuple(part.strip().upper() for part in text.split("-")))

    def render(self) -> str:
        return "-".join(self.types)

    @property
    def cyclable(self) -> bool:
        return self.types[0] == self.types[-1]

    def type_at(self, i: int) -> str:
        """Type at walk position i, cycling with the shared endpoint kept once."""
        k = len(self.types)
        if i < k:
            return self.types[i]
        return self.types[(i - 1) % (k - 1) + 1]


def transition_distribution(g: HetGraph, u: Node, next_type: str) -> dict[Node, float]:
    """P(v | u) proportional to edge weight among neighbors of the next type.

    Non-neighbors and wrong-type neighbors have probability zero and are
    simply absent; an empty map signals a dead end.
    """
    nbrs = g.neighbors_of_type(u, next_type)
    total = sum(w for _, w in nbrs)
    if total == 0:
        return {}
    return {v: w / total for v, w in nbrs}


def sample_successor(g: HetGraph, u: Node, next_type: str, rng: random.Random) -> Node | None:
    """Draw one successor by cumulative-weight inversion over sorted neighbors."""
    nbrs = g.neighbors_of_type(u, next_type)
    if not nbrs:
        return None
    cum = list(accumulate(w for _, w in nbrs))
    r = rng.random() * cum[-1]
    return nbrs[bisect_right(cum, r)][0]


def walk(g: HetGraph, mp: Metapath, start: Node, length: int, rng: random.Random) -> list[Node]:
    """Sample one guided walk; a dead end truncates and returns the walk so far."""
    if start not in g:
        raise UnknownNodeError(start.render())
    if start.type != mp.types[0]:
        raise ValueError(f"start node type {start.type} does not match metapath head {mp.types[0]}")
    if length > len(mp.types) and not mp.cyclable:
        raise ValueError("walk length exceeds metapath length but the metapath is not cyclable")
    path = [start]
    while len(path) < length:
        nxt = sample_successor(g, path[-1], mp.type_at(len(path)), rng)
        if nxt is None:
            break
        path.append(nxt)
    return path


def _walk_rng(seed: int, start: Node, walk_index: int) -> random.Random:
    # String seeding hashes via sha512, stable across runs and platforms, so
    # results are reproducible regardless of how starts are split over workers.
    return random.Random(f"{seed}|{start.render()}|{walk_index}")


def _walks_for_start(
    g: HetGraph,
    mp: Metapath,
    start: Node,
    num_walks: int,
    walk_length: int,
    seed: int,
) -> list[list[Node]]:
    out = []
    for widx in range(num_walks):
        path = walk(g, mp, start, walk_length, _walk_rng(seed, start, widx))
        if len(path) >= 2:
            out.append(path)
    return out


def _walk_chunk(args) -> dict[Node, list[list[Node]]]:
    g, mp, starts, num_walks, walk_length, seed = args
    return {s: _walks_for_start(g, mp, s, num_walks, walk_length, seed) for s in starts}


def generate_corpus(
    g: HetGraph,
    mp: Metapath,
    num_walks: int = 30,
    walk_length: int = 50,
    seed: int = 1,
    workers: int = 1,
) -> list[list[Node]]:
    """num_walks walks of walk_length from every node of the metapath's first type.

    Length-1 walks (immediate dead ends) are discarded. Output is identical
    for any worker count because each walk owns an rng derived from
    (seed, start node, walk index).
    """
    if num_walks < 1:
        raise ValueError("num_walks must be >= 1")
    if walk_length < 2:
        raise ValueError("walk_length must be >= 2")
    starts = g.nodes_of_type(mp.types[0])
    if not starts:
        raise EmptyDataError(f"no nodes of type {mp.types[0]} in the graph")
    if workers <= 1 or len(starts) < 2 * workers:
        return [
            w
            for start in starts
            for w in _walks_for_start(g, mp, start, num_walks, walk_length, seed)
        ]
    chunks = [starts[i::workers] for i in range(workers)]
    by_start: dict[Node, list[list[Node]]] = {}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for result in pool.map(
            _walk_chunk, [(g, mp, c, num_walks, walk_length, seed) for c in chunks]
        ):
            by_start.update(result)
    # Reassemble in start-node order so the corpus matches a sequential run.
    return [w for start in starts for w in by_start[start]]
