"""Versioned plain-text artifact files handed between pipeline stages.

Every file starts with a one-line format-version header so stages can reject
mismatched inputs by name. Floats are written with repr() for full round-trip
precision, which also makes artifact files byte-reproducible.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cluster import TIME_MAPPINGS, ClusterModel
from .embed import EmbeddingTable
from .errors import ArtifactFormatError
from .hetnet import HetGraph, Node, parse_node
from .ingest import Vocabulary

FORMAT_VERSION = 1
_MAGIC = "#geocross"


def _header(kind: str, extra: str = "") -> str:
    line = f"{_MAGIC} {kind} {FORMAT_VERSION}"
    return f"{line} {extra}" if extra else line


def _read_lines(path: str | Path, kind: str) -> tuple[list[str], list[str]]:
    """Returns (header extras, body lines); raises on a bad or missing header."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ArtifactFormatError(f"{path}: empty file, expected a {kind} artifact")
    head = lines[0].split()
    if len(head) < 3 or head[0] != _MAGIC or head[1] != kind:
        raise ArtifactFormatError(f"{path}: not a geocross {kind} file")
    if head[2] != str(FORMAT_VERSION):
        raise ArtifactFormatError(f"{path}: unsupported {kind} format version {head[2]}")
    return head[3:], lines[1:]


def _fmt(value: float) -> str:
    return repr(float(value))


# -- vocabulary -------------------------------------------------------------


def write_vocab(vocab: Vocabulary, path: str | Path) -> None:
    lines = [_header("vocab")]
    lines.extend(f"{w}\t{c}" for w, c in vocab)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_vocab(path: str | Path) -> Vocabulary:
    _, body = _read_lines(path, "vocab")
    words = []
    for line in body:
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ArtifactFormatError(f"{path}: bad vocab line {line!r}")
        try:
            words.append((parts[0], int(parts[1])))
        except ValueError:
            raise ArtifactFormatError(f"{path}: bad vocab count in {line!r}") from None
    return Vocabulary(words)


# -- cluster models ----------------------------------------------------------


def write_cluster_model(model: ClusterModel, path: str | Path) -> None:
    mapping = model.time_mapping or "none"
    lines = [_header("cluster", f"mapping={mapping}")]
    lines.append(f"{model.modality} {_fmt(model.h)} {_fmt(model.merge_radius)} {len(model)}")
    for i in range(len(model)):
        center = " ".join(_fmt(c) for c in model.modes[i])
        lines.append(f"{i} {center} {int(model.populations[i])}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_cluster_model(path: str | Path) -> ClusterModel:
    extras, body = _read_lines(path, "cluster")
    mapping: str | None = None
    for extra in extras:
        key, _, value = extra.partition("=")
        if key == "mapping":
            mapping = None if value == "none" else value
    if mapping is not None and mapping not in TIME_MAPPINGS:
        raise ArtifactFormatError(f"{path}: unknown time mapping {mapping!r}")
    if not body:
        raise ArtifactFormatError(f"{path}: missing cluster header line")
    head = body[0].split()
    if len(head) != 4:
        raise ArtifactFormatError(f"{path}: bad cluster header {body[0]!r}")
    try:
        modality = head[0]
        h = float(head[1])
        merge_radius = float(head[2])
        count = int(head[3])
    except ValueError:
        raise ArtifactFormatError(f"{path}: bad cluster header {body[0]!r}") from None
    if modality not in ("time", "space"):
        raise ArtifactFormatError(f"{path}: unknown modality {modality!r}")
    modes = []
    populations = []
    rows = [line for line in body[1:] if line]
    if len(rows) != count:
        raise ArtifactFormatError(f"{path}: expected {count} modes, found {len(rows)}")
    for i, line in enumerate(rows):
        parts = line.split()
        if len(parts) < 3:
            raise ArtifactFormatError(f"{path}: bad mode line {line!r}")
        try:
            idx = int(parts[0])
            center = [float(c) for c in parts[1:-1]]
            pop = int(parts[-1])
        except ValueError:
            raise ArtifactFormatError(f"{path}: bad mode line {line!r}") from None
        if idx != i:
            raise ArtifactFormatError(f"{path}: mode indices out of order at {line!r}")
        modes.append(center)
        populations.append(pop)
    arr = np.array(modes)
    if arr.ndim != 2:
        raise ArtifactFormatError(f"{path}: inconsistent mode dimensions")
    return ClusterModel(
        modality=modality,
        modes=arr,
        populations=np.array(populations, dtype=np.int64),
        h=h,
        merge_radius=merge_radius,
        time_mapping=mapping,
    )


# -- graphs ------------------------------------------------------------------


def write_graph(g: HetGraph, path: str | Path) -> None:
    lines = [_header("graph")]
    lines.extend(f"{u.render()}\t{v.render()}\t{w}" for u, v, w in g.edges())
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_graph(path: str | Path) -> HetGraph:
    _, body = _read_lines(path, "graph")
    edges = []
    for line in body:
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ArtifactFormatError(f"{path}: bad edge line {line!r}")
        try:
            edges.append((parse_node(parts[0]), parse_node(parts[1]), int(parts[2])))
        except ValueError as exc:
            raise ArtifactFormatError(f"{path}: {exc}") from None
    try:
        return HetGraph.from_edges(edges)
    except ValueError as exc:
        raise ArtifactFormatError(f"{path}: {exc}") from None


# -- walk corpora ------------------------------------------------------------


def write_walks(corpus: Iterable[Sequence[Node]], path: str | Path) -> None:
    lines = [_header("walks")]
    lines.extend(" ".join(n.render() for n in walk) for walk in corpus)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_walks(path: str | Path) -> list[list[Node]]:
    _, body = _read_lines(path, "walks")
    corpus = []
    for line in body:
        if not line:
            continue
        try:
            corpus.append([parse_node(tok) for tok in line.split(" ")])
        except ValueError as exc:
            raise ArtifactFormatError(f"{path}: {exc}") from None
    return corpus


# -- embeddings ---------------------------------------------------------------


def write_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    lines = [_header("embeddings"), f"{len(table)} {table.dim}"]
    for i, node in enumerate(table.nodes):
        vec = " ".join(_fmt(v) for v in table.vectors[i])
        lines.append(f"{node.render()} {vec}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_embeddings(path: str | Path) -> EmbeddingTable:
    """Load the input-vector bank; context vectors are not persisted and load as zero."""
    _, body = _read_lines(path, "embeddings")
    if not body:
        raise ArtifactFormatError(f"{path}: missing embedding size line")
    head = body[0].split()
    if len(head) != 2:
        raise ArtifactFormatError(f"{path}: bad embedding size line {body[0]!r}")
    try:
        count = int(head[0])
        dim = int(head[1])
    except ValueError:
        raise ArtifactFormatError(f"{path}: bad embedding size line {body[0]!r}") from None
    nodes = []
    vectors = np.zeros((count, dim))
    rows = [line for line in body[1:] if line]
    if len(rows) != count:
        raise ArtifactFormatError(f"{path}: expected {count} vectors, found {len(rows)}")
    for i, line in enumerate(rows):
        parts = line.split(" ")
        if len(parts) != dim + 1:
            raise ArtifactFormatError(f"{path}: bad vector line {line.split(' ', 1)[0]!r}")
        try:
            nodes.append(parse_node(parts[0]))
            vectors[i] = [float(v) for v in parts[1:]]
        except ValueError as exc:
            raise ArtifactFormatError(f"{path}: {exc}") from None
    try:
        return EmbeddingTable(nodes, vectors, np.zeros_like(vectors))
    except ValueError as exc:
        raise ArtifactFormatError(f"{path}: {exc}") from None
