"""nyaya command line: serve, ingest, index build/query, classify, eval run, rules lint."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from ..classifier import DomainClassifier, load_lexicon
from ..compliance import lint_rules
from ..config import EngineConfig, data_path
from ..corpus import chunk_corpus, ingest as corpus_ingest
from ..embedding import LocalHashEmbedder
from ..errors import IngestError, NyayaError
from ..evals import load_eval_records
from ..index import VectorIndex
from .engine import Engine


@click.group()
def main() -> None:
    """Retrieval-grounded legal assistant engine."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--strict", is_flag=True, help="Abort on the first malformed line.")
def ingest(input_path: str, strict: bool) -> None:
    """Validate and count records in a corpus file."""
    try:
        with open(input_path, encoding="utf-8") as fh:
            result = corpus_ingest(fh, strict=strict)
    except IngestError as exc:
        raise click.ClickException(str(exc)) from exc
    for issue in result.issues:
        click.echo(f"line {issue.line_no}: {issue.reason}", err=True)
    click.echo(f"ingested {result.count} documents ({len(result.issues)} rejected)")
    if result.issues:
        sys.exit(1)


@main.group()
def index() -> None:
    """Build or query a vector index file."""


@index.command("build")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--dimension", default=256, show_default=True)
@click.option("--chunk-tokens", default=1000, show_default=True)
@click.option("--overlap-tokens", default=200, show_default=True)
def index_build(
    corpus_path: str, out_path: str, dimension: int, chunk_tokens: int, overlap_tokens: int
) -> None:
    with open(corpus_path, encoding="utf-8") as fh:
        result = corpus_ingest(fh)
    embedder = LocalHashEmbedder(dimension=dimension)
    idx = VectorIndex(dimension)
    for chunk in chunk_corpus(result.corpus, chunk_tokens, overlap_tokens):
        idx.add(chunk.chunk_id, embedder.embed(chunk.text))
    idx.save(out_path)
    click.echo(f"indexed {len(idx)} chunks from {result.count} documents into {out_path}")


@index.command("query")
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--text", required=True)
@click.option("-k", default=5, show_default=True)
def index_query(index_path: str, text: str, k: int) -> None:
    idx = VectorIndex.load(index_path)
    embedder = LocalHashEmbedder(dimension=idx.dimension)
    for hit in idx.search(embedder.embed(text), k):
        click.echo(f"{hit.score:+.4f}  {hit.chunk_id}")


@main.command()
@click.option("--text", required=True)
def classify(text: str) -> None:
    """Classify a query by legal domain (lexicon-only, no corpus needed)."""
    clf = DomainClassifier(load_lexicon(data_path("lexicon.jsonl")))
    result = clf.classify(text)
    click.echo(f"label: {result.label.value}  confidence: {result.confidence:.3f}")
    for domain, score in result.scores.items():
        click.echo(f"  {domain.value:<15} {score:.3f}")


@main.group()
def rules() -> None:
    """Compliance rule file utilities."""


@rules.command("lint")
@click.option("--rules", "rules_path", type=click.Path(exists=True), default=None)
def rules_lint(rules_path: str | None) -> None:
    path = rules_path or EngineConfig.from_env().rules_path or data_path("rules.jsonl")
    problems = lint_rules(path)
    if problems:
        for problem in problems:
            click.echo(f"problem: {problem}", err=True)
        sys.exit(1)
    click.echo(f"{path}: ok")


@main.group(name="eval")
def eval_group() -> None:
    """Evaluation harness."""


@eval_group.command("run")
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--k", default=5, show_default=True)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), default=None,
              help="Corpus to index before evaluating (default: bundled sample corpus).")
@click.option("--json-out", type=click.Path(), default=None)
def eval_run(dataset: str, k: int, corpus_path: str | None, json_out: str | None) -> None:
    config = EngineConfig.from_env()
    engine = Engine(config)
    source = corpus_path or str(data_path("sample_corpus.jsonl"))
    with open(source, encoding="utf-8") as fh:
        engine.ingest(fh)
    engine.reindex()
    try:
        records = load_eval_records(dataset)
        report = engine.run_eval(records, k=k)
    except NyayaError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(report.format_tables())
    if json_out:
        Path(json_out).write_text(json.dumps(report.to_dict(), indent=2), encoding="utf-8")
        click.echo(f"wrote {json_out}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=None, type=int, help="Default: NYAYA_PORT or 8080.")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), default=None,
              help="Corpus file to ingest and index at boot (default: bundled sample).")
@click.option("--no-corpus", is_flag=True, help="Start with an empty corpus.")
def serve(host: str, port: int | None, corpus_path: str | None, no_corpus: bool) -> None:
    """Run the HTTP API."""
    import uvicorn

    from .app import create_app

    config = EngineConfig.from_env()
    engine = Engine(config)
    if not no_corpus:
        source = corpus_path or str(data_path("sample_corpus.jsonl"))
        with open(source, encoding="utf-8") as fh:
            result = engine.ingest(fh)
        info = engine.reindex()
        click.echo(f"ingested {result.count} documents, indexed {info['index_size']} chunks")
    uvicorn.run(create_app(engine), host=host, port=port or config.port)


if __name__ == "__main__":
    main()
