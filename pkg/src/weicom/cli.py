"""Operator command line: ingest, query, evaluate, sweep, serve, gen-synthetic.

Every subcommand is a thin wrapper over the library; it only parses flags,
calls the corresponding library entry point, and renders results.  Reports
and result JSON go to standard output or files, diagnostics to standard
error.  Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import benchmark as bench
from . import reports as report_io
from .errors import WeicomError
from .fusion import ComposedQuery, Method, retrieve
from .runtime import apply_thread_cap
from .store import ingest as ingest_corpus
from .store import load_corpus
from .synthetic import SyntheticParams, write_synthetic_corpus

METHOD_NAMES = ["text_only", "image_only", "average", "weicom"]


def parse_lambda_grid(text: str) -> list[float]:
    """Parse ``start:stop:step`` into an inclusive grid.

    The stop value is included when the step divides the range to within
    1e-9; grid points are snapped to 12 decimals so accumulated float error
    does not leak into reports.
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise WeicomError(f"expected START:STOP:STEP, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise WeicomError(f"expected numeric START:STOP:STEP, got {text!r}") from None
    if stop < start:
        raise WeicomError(f"stop {stop} is below start {start}")
    if step <= 0:
        raise WeicomError(f"step must be positive, got {step}")
    count = int((stop - start) / step + 1e-9)
    grid = [round(start + i * step, 12) for i in range(count + 1)]
    if grid[0] < 0.0 or grid[-1] > 1.0:
        raise WeicomError(f"lambda grid must lie within [0, 1], got {text!r}")
    return grid


def _parse_method(name: str, lam: float | None) -> Method:
    if lam is not None and name != "weicom":
        raise WeicomError("--lambda is only meaningful with --method weicom")
    return Method.parse(name, 0.5 if lam is None else lam)


def _eval_method_inputs(corpus_dir: str, spec_path: str):
    corpus = load_corpus(corpus_dir)
    specs = bench.load_benchmark_spec(spec_path)
    suite = bench.build_queries(corpus, specs)
    return corpus, suite


@click.group()
def cli():
    """Composed image retrieval engine with modality-weighted score fusion."""


@cli.command("ingest")
@click.option("--embeddings", required=True, help="image embedding WCEM file")
@click.option("--metadata", required=True, help="image metadata JSONL file")
@click.option("--texts", required=True, help="text embedding WCEM file")
@click.option("--text-meta", required=True, help="text sidecar JSONL file")
@click.option("--out", "out_dir", required=True, help="corpus output directory")
def cmd_ingest(embeddings, metadata, texts, text_meta, out_dir):
    """Validate raw embedding files and persist a corpus directory."""
    corpus = ingest_corpus(embeddings, metadata, texts, text_meta, out_dir)
    click.echo(
        f"ingested {corpus.count} images (dim {corpus.dim}), "
        f"{len(corpus.texts)} texts -> {out_dir}",
        err=True,
    )


@cli.command("query")
@click.option("--corpus", "corpus_dir", required=True, help="corpus directory")
@click.option("--image-id", default=None, help="query image id (corpus member)")
@click.option("--text", default=None, help="query text (must be in the text table)")
@click.option("--method", "method_name", type=click.Choice(METHOD_NAMES), default="weicom")
@click.option("--lambda", "lam", type=float, default=None, help="text weight in [0,1]")
@click.option("--k", type=int, default=10, show_default=True)
@click.option("--exclude-query", is_flag=True, help="drop the query image from the ranking")
def cmd_query(corpus_dir, image_id, text, method_name, lam, k, exclude_query):
    """Run one composed query and print ranked results as JSON."""
    method = _parse_method(method_name, lam)
    corpus = load_corpus(corpus_dir)
    if method.needs_image and image_id is None:
        raise WeicomError(f"--image-id is required for method {method_name}")
    if method.needs_text and text is None:
        raise WeicomError(f"--text is required for method {method_name}")
    if not method.needs_image and image_id is not None:
        raise WeicomError(f"--image-id conflicts with method {method_name}")
    if not method.needs_text and text is not None:
        raise WeicomError(f"--text conflicts with method {method_name}")

    composed = ComposedQuery(
        image_embedding=corpus.image_embedding(image_id) if method.needs_image else None,
        text_embedding=corpus.text_embedding(text) if method.needs_text else None,
        query_image_id=image_id,
    )
    ranked = retrieve(
        composed, corpus, method, k=k, exclude_query_image=exclude_query
    )
    payload = {
        "method": method.kind.value,
        "lambda": method.lam,
        "k": k,
        "exclude_query_image": bool(exclude_query and image_id),
        "results": [
            {
                "rank": i + 1,
                "id": item.image_id,
                "score": item.score,
                "class": corpus.records[item.index].class_name,
                "attributes": dict(corpus.records[item.index].attributes),
            }
            for i, item in enumerate(ranked)
        ],
    }
    click.echo(json.dumps(payload, sort_keys=True, indent=2))


@cli.command("evaluate")
@click.option("--corpus", "corpus_dir", required=True, help="corpus directory")
@click.option("--benchmark", "spec_path", required=True, help="benchmark spec JSON")
@click.option("--method", "method_name", type=click.Choice(METHOD_NAMES), required=True)
@click.option("--lambda", "lam", type=float, default=None, help="text weight in [0,1]")
@click.option("--out", "out_path", required=True, help="report JSON output path")
@click.option("--suite-out", default=None, help="also write the generated suite JSONL")
def cmd_evaluate(corpus_dir, spec_path, method_name, lam, out_path, suite_out):
    """Evaluate one method by attribute-modification mAP."""
    method = _parse_method(method_name, lam)
    corpus, suite = _eval_method_inputs(corpus_dir, spec_path)
    if suite_out:
        bench.save_suite(suite_out, suite)
    report = bench.evaluate(corpus, suite, method)
    Path(out_path).write_text(
        report_io.to_json(report_io.eval_report_dict(report)), encoding="utf-8"
    )
    click.echo(report_io.render_eval_table(report), nl=False)


@cli.command("sweep")
@click.option("--corpus", "corpus_dir", required=True, help="corpus directory")
@click.option("--benchmark", "spec_path", required=True, help="benchmark spec JSON")
@click.option("--lambdas", required=True, help="grid as START:STOP:STEP, e.g. 0.0:1.0:0.1")
@click.option("--out", "out_path", required=True, help="sweep JSON output path")
@click.option("--suite-out", default=None, help="also write the generated suite JSONL")
def cmd_sweep(corpus_dir, spec_path, lambdas, out_path, suite_out):
    """Sweep the modality control weight and report mAP per grid point."""
    grid = parse_lambda_grid(lambdas)
    corpus, suite = _eval_method_inputs(corpus_dir, spec_path)
    if suite_out:
        bench.save_suite(suite_out, suite)
    report = bench.lambda_sweep(corpus, suite, grid)
    Path(out_path).write_text(
        report_io.to_json(report_io.sweep_report_dict(report)), encoding="utf-8"
    )
    click.echo(report_io.render_sweep_table(report), nl=False)


@cli.command("serve")
@click.option("--corpus", "corpus_dir", required=True, help="corpus directory")
@click.option("--listen", default="127.0.0.1:8000", show_default=True, help="HOST:PORT")
@click.option("--images", "images_dir", default=None, help="thumbnail directory (id -> file)")
@click.option("--benchmark", "spec_path", default=None, help="benchmark spec JSON for vocabulary grouping")
@click.option("--cors", default=None, help="comma-separated allowed origins for the explorer UI")
def cmd_serve(corpus_dir, listen, images_dir, spec_path, cors):
    """Serve the JSON-over-HTTP retrieval API."""
    import uvicorn

    from .service import create_app, vocabulary_groups_from_specs

    host, sep, port_text = listen.rpartition(":")
    if not sep or not port_text.isdigit():
        raise WeicomError(f"--listen must be HOST:PORT, got {listen!r}")
    corpus = load_corpus(corpus_dir)
    groups = None
    if spec_path:
        specs = bench.load_benchmark_spec(spec_path)
        groups = vocabulary_groups_from_specs(specs, corpus)
    app = create_app(
        corpus=corpus,
        images_dir=images_dir,
        vocabulary_groups=groups,
        cors_origins=cors.split(",") if cors else None,
    )
    click.echo(f"serving corpus of {corpus.count} images on {listen}", err=True)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port_text), log_level="warning")


@cli.command("gen-synthetic")
@click.option("--classes", type=int, default=4, show_default=True)
@click.option("--values", type=int, default=3, show_default=True)
@click.option("--per-cell", type=int, default=20, show_default=True, help="images per (class, value) cell")
@click.option("--dim", type=int, default=32, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--out", "out_dir", required=True, help="corpus output directory")
def cmd_gen_synthetic(classes, values, per_cell, dim, seed, out_dir):
    """Generate a seeded synthetic corpus with planted structure."""
    try:
        params = SyntheticParams(
            classes=classes, values=values, per_cell=per_cell, dim=dim, seed=seed
        )
    except ValueError as exc:
        raise WeicomError(str(exc)) from None
    out = write_synthetic_corpus(params, out_dir)
    click.echo(
        f"wrote synthetic corpus ({classes}x{values}x{per_cell} images, dim {dim}, "
        f"seed {seed}) -> {out}",
        err=True,
    )


def main(argv: list[str] | None = None) -> int:
    try:
        apply_thread_cap()
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except WeicomError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
