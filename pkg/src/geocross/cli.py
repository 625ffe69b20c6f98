"""Thin command-line client for the pipeline service.

Every subcommand builds the same request model the HTTP API accepts. By
default it runs the handler in-process; with --server it posts the request to
a running service instead. All flags can also be set through environment
variables prefixed GEOCROSS_<COMMAND>_<OPTION>.
"""

from __future__ import annotations

import logging
import sys

import click
from pydantic import BaseModel, ValidationError

from . import __version__
from .errors import GeoCrossError
from .service import models

CONTEXT_SETTINGS = {"auto_envvar_prefix": "GEOCROSS", "help_option_names": ["-h", "--help"]}


def _format_validation_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "request"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def _build(request_cls: type[BaseModel], **kwargs) -> BaseModel:
    try:
        return request_cls(**kwargs)
    except ValidationError as exc:
        raise click.UsageError(_format_validation_error(exc)) from None


def _dispatch(ctx: click.Context, endpoint: str, request: BaseModel) -> BaseModel:
    from .service.handlers import ENDPOINTS

    handler, _, response_cls = ENDPOINTS[endpoint]
    server = (ctx.obj or {}).get("server")
    if server:
        import httpx

        url = f"{server.rstrip('/')}/{endpoint}"
        try:
            resp = httpx.post(url, json=request.model_dump(mode="json"), timeout=None)
        except httpx.HTTPError as exc:
            raise click.ClickException(f"request to {url} failed: {exc}") from None
        if resp.status_code >= 400:
            try:
                detail = resp.json().get("detail", resp.text)
            except ValueError:
                detail = resp.text
            raise click.ClickException(f"{endpoint} failed ({resp.status_code}): {detail}")
        return response_cls.model_validate(resp.json())
    try:
        return handler(request)
    except FileNotFoundError as exc:
        raise click.ClickException(f"missing file: {exc.filename or exc}") from None
    except IsADirectoryError as exc:
        raise click.ClickException(f"expected a file: {exc.filename or exc}") from None
    except (GeoCrossError, ValueError) as exc:
        raise click.ClickException(str(exc)) from None


@click.group(context_settings=CONTEXT_SETTINGS)
@click.version_option(__version__)
@click.option("--server", default=None, metavar="URL", help="Base URL of a running geocross service; default runs in-process.")
@click.option("-v", "--verbose", is_flag=True, help="Log stage progress to stderr.")
@click.pass_context
def main(ctx: click.Context, server: str | None, verbose: bool) -> None:
    """Joint time-location-word embeddings from geo-tagged short text."""
    ctx.obj = {"server": server}
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


@main.command()
@click.option("--corpus", required=True, help="Input record file (tsv).")
@click.option("--output", required=True, help="Vocabulary file to write.")
@click.option("--stopwords", default=None, help="Stopword file, one word per line.")
@click.option("--k", default=20000, show_default=True, help="Vocabulary size cap.")
@click.option("--min-freq", default=100, show_default=True, help="Minimum corpus frequency.")
@click.pass_context
def vocab(ctx, corpus, output, stopwords, k, min_freq):
    """Build the frequency-ranked vocabulary."""
    req = _build(models.VocabRequest, corpus=corpus, output=output, stopwords=stopwords, k=k, min_freq=min_freq)
    resp = _dispatch(ctx, "vocab", req)
    rejected = sum(resp.rejected.values())
    click.echo(f"vocabulary: {resp.words} words from {resp.records} records -> {resp.path}"
               + (f" ({rejected} lines rejected)" if rejected else ""))


@main.command()
@click.option("--corpus", required=True, help="Input record file (tsv).")
@click.option("--output", required=True, help="Cluster model file to write.")
@click.option("--modality", required=True, type=click.Choice(["time", "space"]))
@click.option("--bandwidth", default=None, type=float, help="Kernel bandwidth [default: 1000 time / 0.05 space].")
@click.option("--time-mapping", default="day", show_default=True, type=click.Choice(["absolute", "day", "week"]))
@click.option("--tol", default=None, type=float, help="Convergence distance [default: 1e-4 * bandwidth].")
@click.option("--max-iter", default=200, show_default=True)
@click.option("--merge-radius", default=None, type=float, help="Mode merge radius [default: bandwidth / 2].")
@click.option("--cell-size", default=None, type=float, help="Grid cell size [default: bandwidth / 2].")
@click.pass_context
def cluster(ctx, corpus, output, modality, bandwidth, time_mapping, tol, max_iter, merge_radius, cell_size):
    """Mean-shift cluster record times or locations."""
    if bandwidth is None:
        bandwidth = 1000.0 if modality == "time" else 0.05
    req = _build(
        models.ClusterRequest,
        corpus=corpus, output=output, modality=modality, bandwidth=bandwidth,
        time_mapping=time_mapping, tol=tol, max_iter=max_iter,
        merge_radius=merge_radius, cell_size=cell_size,
    )
    resp = _dispatch(ctx, "cluster", req)
    click.echo(f"{resp.modality} clusters: {resp.modes} modes from {resp.points} points -> {resp.path}")


@main.command()
@click.option("--corpus", required=True, help="Input record file (tsv).")
@click.option("--vocab", "vocab_path", required=True, help="Vocabulary file.")
@click.option("--time-model", required=True, help="Time cluster model file.")
@click.option("--space-model", required=True, help="Space cluster model file.")
@click.option("--output", required=True, help="Graph edge file to write.")
@click.pass_context
def graph(ctx, corpus, vocab_path, time_model, space_model, output):
    """Build the time-location-word co-occurrence network."""
    req = _build(models.GraphRequest, corpus=corpus, vocab=vocab_path,
                 time_model=time_model, space_model=space_model, output=output)
    resp = _dispatch(ctx, "graph", req)
    click.echo(f"graph: {resp.nodes} nodes, {resp.edges} edges (total weight {resp.total_weight}) -> {resp.path}")


@main.command()
@click.option("--graph", "graph_path", required=True, help="Graph edge file.")
@click.option("--output", required=True, help="Walk corpus file to write.")
@click.option("--metapath", default="W-W-L-W-W", show_default=True, help="Dash-separated node types, e.g. W-W-L-T-L-W-W.")
@click.option("--num-walks", default=30, show_default=True, help="Walks per start node.")
@click.option("--walk-length", default=50, show_default=True, help="Nodes per walk.")
@click.option("--seed", default=1, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.pass_context
def walk(ctx, graph_path, output, metapath, num_walks, walk_length, seed, workers):
    """Generate metapath-guided random walks."""
    req = _build(models.WalkRequest, graph=graph_path, output=output, metapath=metapath,
                 num_walks=num_walks, walk_length=walk_length, seed=seed, workers=workers)
    resp = _dispatch(ctx, "walk", req)
    click.echo(f"walks: {resp.walks} kept of {resp.attempted} attempted from {resp.start_nodes} start nodes -> {resp.path}")


@main.command()
@click.option("--walks", "walks_path", required=True, help="Walk corpus file.")
@click.option("--output", required=True, help="Embedding file to write.")
@click.option("--dim", default=300, show_default=True)
@click.option("--window", default=7, show_default=True)
@click.option("--negatives", default=5, show_default=True)
@click.option("--epochs", default=5, show_default=True)
@click.option("--learning-rate", default=0.025, show_default=True)
@click.option("--seed", default=1, show_default=True)
@click.option("--workers", default=1, show_default=True, help="1 is deterministic; more use lock-free parallel training.")
@click.pass_context
def embed(ctx, walks_path, output, dim, window, negatives, epochs, learning_rate, seed, workers):
    """Train type-aware skip-gram embeddings from the walk corpus."""
    req = _build(models.EmbedRequest, walks=walks_path, output=output, dim=dim, window=window,
                 negatives=negatives, epochs=epochs, learning_rate=learning_rate, seed=seed, workers=workers)
    resp = _dispatch(ctx, "embed", req)
    click.echo(f"embeddings: {resp.nodes} nodes x {resp.dim} dims from {resp.walks} walks -> {resp.path}")


@main.command()
@click.option("--embeddings", required=True, help="Embedding file.")
@click.option("--word", default=None, help="Query a vocabulary word.")
@click.option("--time", "time_", default=None, type=int, help="Query an epoch-seconds timestamp.")
@click.option("--latlon", default=None, help="Query 'lat,lon' coordinates.")
@click.option("--k", default=10, show_default=True, help="Results per node type.")
@click.option("--vocab", "vocab_path", default=None, help="Vocabulary file (needed for word queries).")
@click.option("--time-model", default=None, help="Time cluster model (needed for time queries).")
@click.option("--space-model", default=None, help="Space cluster model (needed for location queries and labels).")
@click.option("--geojson", default=None, help="Write location results as a GeoJSON FeatureCollection.")
@click.pass_context
def query(ctx, embeddings, word, time_, latlon, k, vocab_path, time_model, space_model, geojson):
    """Resolve a query and print top-k nearest neighbors per node type."""
    given = sum(x is not None for x in (word, time_, latlon))
    if given != 1:
        raise click.UsageError("exactly one of --word, --time, or --latlon is required")
    latlon_pair = None
    if latlon is not None:
        try:
            lat_s, lon_s = latlon.split(",")
            latlon_pair = (float(lat_s), float(lon_s))
        except ValueError:
            raise click.UsageError(f"--latlon expects 'lat,lon', got {latlon!r}") from None
    req = _build(models.QueryRequest, embeddings=embeddings, word=word, time=time_,
                 latlon=latlon_pair, k=k, vocab=vocab_path, time_model=time_model,
                 space_model=space_model, geojson=geojson)
    resp = _dispatch(ctx, "query", req)
    click.echo(f"query: {resp.query}")
    for node_type, title in (("W", "words"), ("L", "locations"), ("T", "times")):
        hits = resp.results.get(node_type, [])
        click.echo(f"{title}:")
        if not hits:
            click.echo("  (none)")
            continue
        for rank, hit in enumerate(hits, 1):
            label = f"  {hit.label}" if hit.label and hit.label != hit.node else ""
            click.echo(f"  {rank:>3}  {hit.node:<24} {hit.score: .4f}{label}")
    if resp.geojson_path:
        click.echo(f"geojson -> {resp.geojson_path}")


@main.command(name="eval")
@click.option("--test-corpus", required=True, help="Held-out record file (tsv).")
@click.option("--embeddings", required=True, help="Embedding file.")
@click.option("--vocab", "vocab_path", required=True, help="Vocabulary file.")
@click.option("--time-model", required=True, help="Time cluster model file.")
@click.option("--space-model", required=True, help="Space cluster model file.")
@click.option("--k-eval", default=None, type=int, help="Optional rank cutoff; default ranks the full type population.")
@click.pass_context
def eval_cmd(ctx, test_corpus, embeddings, vocab_path, time_model, space_model, k_eval):
    """Score retrieval on held-out records with mean reciprocal rank."""
    req = _build(models.EvalRequest, test_corpus=test_corpus, embeddings=embeddings,
                 vocab=vocab_path, time_model=time_model, space_model=space_model, k_eval=k_eval)
    resp = _dispatch(ctx, "eval", req)
    if resp.text_mrr is not None:
        click.echo(f"text_mrr {resp.text_mrr}")
    if resp.location_mrr is not None:
        click.echo(f"location_mrr {resp.location_mrr}")
    click.echo(f"overall_mrr {resp.overall_mrr}", err=False)
    if resp.skipped:
        click.echo(f"# skipped {resp.skipped} pairs with untrained query nodes", err=True)


@main.command()
@click.option("--corpus", required=True, help="Input record file (tsv).")
@click.option("--workdir", required=True, help="Directory for all artifact files.")
@click.option("--stopwords", default=None)
@click.option("--vocab-k", default=20000, show_default=True)
@click.option("--min-freq", default=100, show_default=True)
@click.option("--loc-bandwidth", default=0.05, show_default=True)
@click.option("--time-bandwidth", default=1000.0, show_default=True)
@click.option("--time-mapping", default="day", show_default=True, type=click.Choice(["absolute", "day", "week"]))
@click.option("--metapath", default="W-W-L-W-W", show_default=True)
@click.option("--num-walks", default=30, show_default=True)
@click.option("--walk-length", default=50, show_default=True)
@click.option("--dim", default=300, show_default=True)
@click.option("--window", default=7, show_default=True)
@click.option("--negatives", default=5, show_default=True)
@click.option("--epochs", default=5, show_default=True)
@click.option("--learning-rate", default=0.025, show_default=True)
@click.option("--seed", default=1, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.pass_context
def pipeline(ctx, **kwargs):
    """Run every stage in order: vocab, clusters, graph, walks, embeddings."""
    req = _build(models.PipelineRequest, **kwargs)
    resp = _dispatch(ctx, "pipeline", req)
    click.echo(f"pipeline finished in {resp.seconds:.1f}s")
    click.echo(f"  vocab:      {resp.vocab.words} words")
    click.echo(f"  clusters:   {resp.time_clusters.modes} time, {resp.space_clusters.modes} space")
    click.echo(f"  graph:      {resp.graph.edges} edges over {resp.graph.nodes} nodes")
    click.echo(f"  walks:      {resp.walks.walks}")
    click.echo(f"  embeddings: {resp.embeddings.nodes} x {resp.embeddings.dim}")
    for name, path in resp.files.items():
        click.echo(f"  {name}: {path}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
