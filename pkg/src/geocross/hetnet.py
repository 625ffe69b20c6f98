"""Typed, weighted, undirected co-occurrence network over time/location/word nodes.

Each record contributes one node per time cluster, location cluster, and
distinct keyword; every unordered pair among them is an edge, and edge weight
counts the records in which the pair co-occurs.
"""

from __future__ import annotations

from collections import Counter
from itertools import combinations
from typing import Iterable, Iterator, NamedTuple

from .errors import UnknownNodeError

NODE_TYPES = ("T", "L", "W")


class Node(NamedTuple):
    """Typed node id: integer cluster index for T/L, word string for W."""

    type: str
    key: int | str

    def render(self) -> str:
        return f"{self.type}:{self.key}"


def parse_node(text: str) -> Node:
    kind, sep, key = text.partition(":")
    if not sep or kind not in NODE_TYPES or not key:
        raise ValueError(f"bad node id {text!r}")
    if kind == "W":
        return Node(kind, key)
    try:
        return Node(kind, int(key))
    except ValueError:
        raise ValueError(f"bad node id {text!r}: {kind} keys are integers") from None


class ClusteredRecord(NamedTuple):
    """A record reduced to its time cluster, location cluster, and keyword set."""

    time_cluster: int
    loc_cluster: int
    keywords: tuple[str, ...]


def _canonical(u: Node, v: Node) -> tuple[Node, Node]:
    return (u, v) if u <= v else (v, u)


def record_edges(rec: ClusteredRecord) -> list[tuple[Node, Node]]:
    """All unordered pairs among the record's T node, L node, and keyword nodes.

    With m distinct keywords that is exactly (m+2)(m+1)/2 pairs.
    """
    nodes = [Node("T", rec.time_cluster), Node("L", rec.loc_cluster)]
    nodes.extend(Node("W", w) for w in sorted(set(rec.keywords)))
    return [_canonical(u, v) for u, v in combinations(nodes, 2)]


class HetGraph:
    """Undirected weighted typed graph with symmetric O(1) adjacency."""

    def __init__(self):
        self._adj: dict[Node, dict[Node, int]] = {}
        self._by_type: dict[str, list[Node]] | None = None

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[Node, Node, int]]) -> "HetGraph":
        g = cls()
        for u, v, w in edges:
            g._add_edge(u, v, w)
        return g

    def _add_edge(self, u: Node, v: Node, weight: int) -> None:
        if u == v:
            raise ValueError(f"self-loop on {u.render()}")
        if weight < 1 or int(weight) != weight:
            raise ValueError(f"edge weight must be a positive integer, got {weight!r}")
        if v in self._adj.get(u, ()):
            raise ValueError(f"duplicate edge {u.render()} -- {v.render()}")
        self._adj.setdefault(u, {})[v] = int(weight)
        self._adj.setdefault(v, {})[u] = int(weight)
        self._by_type = None

    def __contains__(self, node: Node) -> bool:
        return node in self._adj

    def __len__(self) -> int:
        return len(self._adj)

    def nodes(self) -> list[Node]:
        return sorted(self._adj)

    def nodes_of_type(self, node_type: str) -> list[Node]:
        if self._by_type is None:
            by_type: dict[str, list[Node]] = {t: [] for t in NODE_TYPES}
            for node in sorted(self._adj):
                by_type[node.type].append(node)
            self._by_type = by_type
        return list(self._by_type.get(node_type, ()))

    def weight(self, u: Node, v: Node) -> int:
        return self._adj.get(u, {}).get(v, 0)

    def neighbors(self, u: Node) -> dict[Node, int]:
        if u not in self._adj:
            raise UnknownNodeError(u.render())
        return self._adj[u]

    def neighbors_of_type(self, u: Node, node_type: str) -> list[tuple[Node, int]]:
        """Adjacent nodes of one type with weights, sorted by key."""
        if u not in self._adj:
            raise UnknownNodeError(u.render())
        items = [(v, w) for v, w in self._adj[u].items() if v.type == node_type]
        items.sort(key=lambda vw: vw[0])
        return items

    def edges(self) -> Iterator[tuple[Node, Node, int]]:
        """Canonical (u <= v) edges in sorted order."""
        seen = []
        for u, nbrs in self._adj.items():
            for v, w in nbrs.items():
                if u <= v:
                    seen.append((u, v, w))
        seen.sort()
        return iter(seen)

    @property
    def num_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self._adj.values()) // 2

    @property
    def total_weight(self) -> int:
        return sum(w for nbrs in self._adj.values() for w in nbrs.values()) // 2


def build_network(records: Iterable[ClusteredRecord]) -> HetGraph:
    """Accumulate co-occurrence edges over a record stream.

    Order independent: the same multiset of records yields the same graph.
    Vertices that never co-occur with anything are absent by construction.
    """
    counts: Counter[tuple[Node, Node]] = Counter()
    for rec in records:
        counts.update(record_edges(rec))
    return HetGraph.from_edges((u, v, w) for (u, v), w in counts.items())


def neighbors_of_type(g: HetGraph, u: Node, node_type: str) -> list[tuple[Node, int]]:
    return g.neighbors_of_type(u, node_type)
