"""Admin CLI: serve the API, validate/ingest data files, build indexes,
run queries, and check egress policy decisions.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .. import catalog as catalog_mod
from .. import drugs as drugs_mod
from .. import podpolicy
from .. import search as search_mod
from .. import termmap
from ..errors import ParseError, PlatformError, ValidationError
from ..vecindex import save_index
from .config import ApiConfig

EXIT_VALIDATION = 1
EXIT_IO = 2


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except FileNotFoundError as exc:
        _fail(str(exc), EXIT_IO)
    except OSError as exc:
        _fail(str(exc), EXIT_IO)
    except (ParseError, ValidationError) as exc:
        _fail(str(exc), EXIT_VALIDATION)


@click.group()
def main():
    """Medical data platform admin CLI."""


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
def serve(config_path):
    """Run the HTTP gateway."""
    import uvicorn

    from .app import create_app

    try:
        config = ApiConfig.load(config_path)
        app = create_app(config)
    except (ParseError, ValidationError) as exc:
        _fail(str(exc), EXIT_VALIDATION)
        return
    uvicorn.run(app, host=config.host, port=config.port)


@main.command()
@click.argument("kind", type=click.Choice(["catalog", "drugs", "concepts", "papers"]))
@click.argument("path", type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def ingest(kind, path, as_json):
    """Validate a data file and report what it contains."""
    loaders = {
        "catalog": lambda p: len(catalog_mod.load_catalog(p)),
        "drugs": lambda p: len(drugs_mod.load_drugs(p)),
        "concepts": lambda p: len(termmap.load_concepts(p)),
        "papers": lambda p: len(search_mod.load_papers(p)),
    }
    count = _guard(loaders[kind], path)
    if as_json:
        click.echo(json.dumps({"kind": kind, "records": count}, sort_keys=True))
    else:
        click.echo(f"{kind}: {count} records OK")


@main.group()
def index():
    """Index maintenance."""


@index.command("build")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
def index_build(config_path, out_path):
    """Chunk and embed the dataset + papers corpora; write the dataset index."""

    def build():
        config = ApiConfig.load(config_path)
        catalog = catalog_mod.load_catalog(config.catalog_path)
        papers = search_mod.load_papers(config.papers_path)
        engine = search_mod.SearchEngine(dim=config.embedding_dim)
        docs = engine.index_corpus(catalog, papers)
        save_index(engine.dataset_index, out_path)
        return docs, len(engine.dataset_index)

    docs, chunks = _guard(build)
    click.echo(f"indexed {docs} documents ({chunks} dataset chunks) -> {out_path}")


@main.group()
def query():
    """Run one-off queries against the configured fixtures."""


def _engine(config):
    catalog = catalog_mod.load_catalog(config.catalog_path)
    papers = search_mod.load_papers(config.papers_path)
    engine = search_mod.SearchEngine(dim=config.embedding_dim)
    engine.index_corpus(catalog, papers)
    return engine


@query.command("datasets")
@click.argument("text")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("-k", default=5)
@click.option("--json", "as_json", is_flag=True)
def query_datasets(text, config_path, k, as_json):
    def run():
        config = ApiConfig.load(config_path)
        return _engine(config).search_datasets(text, k)

    results = _guard(run)
    if as_json:
        click.echo(
            json.dumps(
                [
                    {"id": r.target_id, "score": r.score, "tier": r.tier.value}
                    for r in results
                ],
                sort_keys=True,
            )
        )
    else:
        for r in results:
            click.echo(f"{r.score:8.4f}  {r.target_id}  [{r.tier.value}]")


@query.command("papers")
@click.argument("text")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("-k", default=5)
@click.option("--json", "as_json", is_flag=True)
def query_papers(text, config_path, k, as_json):
    def run():
        config = ApiConfig.load(config_path)
        return _engine(config).search_papers(text, k)

    results = _guard(run)
    if as_json:
        click.echo(
            json.dumps([{"id": r.target_id, "score": r.score} for r in results], sort_keys=True)
        )
    else:
        for r in results:
            click.echo(f"{r.score:8.4f}  {r.target_id}")


@query.command("term")
@click.argument("text")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--system", default=None)
@click.option("-k", default=5)
@click.option("--json", "as_json", is_flag=True)
def query_term(text, config_path, system, k, as_json):
    def run():
        config = ApiConfig.load(config_path)
        dictionary = termmap.load_concepts(config.concepts_path)
        return termmap.map_term(dictionary, text, system, k)

    candidates = _guard(run)
    if as_json:
        click.echo(
            json.dumps(
                [
                    {
                        "system": c.concept.system,
                        "code": c.concept.code,
                        "preferred_term": c.concept.preferred_term,
                        "score": c.score,
                        "rank": c.rank,
                        "matched_via": c.matched_via,
                    }
                    for c in candidates
                ],
                sort_keys=True,
            )
        )
    else:
        for c in candidates:
            click.echo(
                f"{c.rank}. {c.concept.system} {c.concept.code}  {c.concept.preferred_term}"
                f"  ({c.score:.4f}, {c.matched_via})"
            )


@query.command("drug")
@click.argument("text")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--json", "as_json", is_flag=True)
def query_drug(text, config_path, as_json):
    def run():
        config = ApiConfig.load(config_path)
        store = drugs_mod.load_drugs(config.drugs_path)
        return drugs_mod.search_drugs(store, text)

    results = _guard(run)
    if as_json:
        click.echo(json.dumps([r.to_dict() for r in results], sort_keys=True))
    else:
        for r in results:
            click.echo(f"{r.drug_id}  {r.name}  {'/'.join(c.code for c in r.atc_codes)}")


@main.group()
def policy():
    """Egress policy checks."""


@policy.command("check")
@click.argument("host")
@click.argument("kind")
@click.argument("action")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--json", "as_json", is_flag=True)
def policy_check(host, kind, action, config_path, as_json):
    def run():
        config = ApiConfig.load(config_path)
        pol = podpolicy.EgressPolicy.load(config.policy_path)
        request = podpolicy.EgressRequest(host=host.lower(), kind=kind, action=action)
        return podpolicy.evaluate_egress(pol, request)

    decision = _guard(run)
    if as_json:
        click.echo(
            json.dumps(
                {
                    "verdict": decision.verdict,
                    "code": decision.code,
                    "message": decision.message,
                },
                sort_keys=True,
            )
        )
    else:
        click.echo(decision.verdict)


if __name__ == "__main__":
    main()
